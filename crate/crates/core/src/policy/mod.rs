//! Feedforward policy network with clean and noise-perturbed forward passes.

mod checkpoint;
mod network;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use network::{log_prob, sample_action, NoiseRecord, PassCache, PolicyNetwork, PROB_FLOOR};
