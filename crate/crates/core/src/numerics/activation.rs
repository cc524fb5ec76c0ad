/// LeakyReLU slope for negative inputs.
pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

/// Elementwise `x` for `x >= 0`, `alpha·x` otherwise.
pub fn leaky_relu(v: &[f64], alpha: f64) -> Vec<f64> {
    v.iter().map(|&x| if x >= 0.0 { x } else { alpha * x }).collect()
}

/// Derivative of [`leaky_relu`]. The kink at exactly zero takes slope `alpha`.
pub fn leaky_relu_derivative(x: f64, alpha: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        alpha
    }
}

/// Max-shifted softmax.
pub fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}
