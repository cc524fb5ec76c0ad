//! Dense linear algebra, seeded randomness, and the network nonlinearities.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; matrices are row-major
//! [`Matrix`] values. Everything is 64-bit floating point.

mod activation;
mod matrix;
mod rng;

pub use activation::{leaky_relu, leaky_relu_derivative, softmax, DEFAULT_LEAKY_SLOPE};
pub use matrix::{axpy, dot, norm_sq, outer, Matrix};
pub use rng::{gaussian_vector, RandomSource};

/// Cosine similarity of two equally sized vectors. Zero if either is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let denom = (norm_sq(a) * norm_sq(b)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}
