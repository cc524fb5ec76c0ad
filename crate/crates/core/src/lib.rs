//! Noise-based reward-modulated learning.
//!
//! A policy network learns from a scalar reward without backpropagation:
//! each forward pass is run twice, once clean and once with Gaussian noise
//! injected into every neuron, and the change in the chosen action's
//! log-probability (`ρ`) tags each synapse through an eligibility trace.
//! When a reward arrives the reward prediction error `δ` turns the trace
//! into a weight update.
//!
//! - [`numerics`]: row-major matrices, seeded random streams, activations
//! - [`policy`]: the policy network, clean/noisy passes, exact `∇ log π`
//! - [`rules`]: NRL, reward-modulated Hebbian, and exact-gradient updates
//! - [`env`]: Reaching, Cartpole, and Acrobot simulators
//! - [`gradcheck`]: Monte-Carlo checks of the directional-derivative estimator
//! - [`harness`]: experiment configs, multi-seed runs, metrics, and SVG plots

pub mod env;
pub mod error;
pub mod gradcheck;
pub mod harness;
pub mod numerics;
pub mod policy;
pub mod rules;

pub use error::{Error, Result};
