use crate::error::{Error, Result};
use crate::numerics::{
    gaussian_vector, leaky_relu_derivative, norm_sq, softmax, Matrix, RandomSource,
};

/// Probabilities below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Bias-free multilayer perceptron: LeakyReLU hidden layers, softmax readout.
///
/// `weights[l]` maps layer `l` activity (size `layer_sizes[l]`) to layer
/// `l + 1` pre-activation, so it is shaped `layer_sizes[l+1] × layer_sizes[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNetwork {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix>,
    alpha: f64,
}

/// Activity recorded during one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassCache {
    input: Vec<f64>,
    /// Pre-activations per weight layer, noise included for noisy passes.
    pre: Vec<Vec<f64>>,
    /// Post-activations per weight layer; the last entry holds the
    /// action probabilities.
    act: Vec<Vec<f64>>,
    noisy: bool,
}

/// Noise injected into every layer's pre-activation during a noisy pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRecord {
    raw: Vec<Vec<f64>>,
    scaled: Vec<Vec<f64>>,
    sigma: f64,
}

impl PolicyNetwork {
    /// Random network with weights uniform in `±1/√fan_in`.
    pub fn new(layer_sizes: &[usize], alpha: f64, rng: &mut RandomSource) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = 1.0 / (fan_in as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.uniform_in(-bound, bound))
                    .collect();
                Matrix::from_vec(fan_out, fan_in, data)
            })
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            alpha,
        })
    }

    pub fn zeros(layer_sizes: &[usize], alpha: f64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let weights = layer_sizes
            .windows(2)
            .map(|w| Matrix::zeros(w[1], w[0]))
            .collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            alpha,
        })
    }

    pub fn from_weights(weights: Vec<Matrix>, alpha: f64) -> Result<Self> {
        let first = weights
            .first()
            .ok_or_else(|| Error::Config("network needs at least one layer".into()))?;
        let mut layer_sizes = vec![first.cols()];
        for w in &weights {
            let expected = *layer_sizes.last().unwrap();
            if w.cols() != expected {
                return Err(Error::Dimension {
                    expected,
                    got: w.cols(),
                });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("weights"));
            }
            layer_sizes.push(w.rows());
        }
        validate_sizes(&layer_sizes)?;
        Ok(Self {
            layer_sizes,
            weights,
            alpha,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    /// Number of weight layers.
    pub fn depth(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn action_count(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    /// Mutable view of one layer's row-major weights. The shape is fixed.
    pub fn layer_weights_mut(&mut self, layer: usize) -> &mut [f64] {
        self.weights[layer].as_mut_slice()
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.as_slice().len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
    }

    /// `W^l += scale · deltas[l]` for every layer.
    pub fn add_scaled(&mut self, scale: f64, deltas: &[Matrix]) -> Result<()> {
        if deltas.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                got: deltas.len(),
            });
        }
        for (w, d) in self.weights.iter().zip(deltas) {
            if w.shape() != d.shape() {
                return Err(Error::Dimension {
                    expected: w.as_slice().len(),
                    got: d.as_slice().len(),
                });
            }
        }
        for (w, d) in self.weights.iter_mut().zip(deltas) {
            crate::numerics::axpy(scale, d.as_slice(), w.as_mut_slice());
        }
        Ok(())
    }

    fn check_input(&self, obs: &[f64]) -> Result<()> {
        if obs.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: obs.len(),
            });
        }
        Ok(())
    }

    fn forward(&self, obs: &[f64], noise: Option<&[Vec<f64>]>) -> PassCache {
        let depth = self.depth();
        let mut pre = Vec::with_capacity(depth);
        let mut act: Vec<Vec<f64>> = Vec::with_capacity(depth);
        for (l, w) in self.weights.iter().enumerate() {
            let input = if l == 0 { obs } else { &act[l - 1] };
            let mut h = w.matvec(input);
            if let Some(noise) = noise {
                for (hi, xi) in h.iter_mut().zip(&noise[l]) {
                    *hi += xi;
                }
            }
            let x = if l + 1 == depth {
                softmax(&h)
            } else {
                crate::numerics::leaky_relu(&h, self.alpha)
            };
            pre.push(h);
            act.push(x);
        }
        PassCache {
            input: obs.to_vec(),
            pre,
            act,
            noisy: noise.is_some(),
        }
    }

    /// Noise-free forward pass.
    pub fn clean_pass(&self, obs: &[f64]) -> Result<PassCache> {
        self.check_input(obs)?;
        Ok(self.forward(obs, None))
    }

    /// Forward pass with fresh N(0, sigma²) noise added to every layer's
    /// pre-activation, the readout included. Noise is drawn layer by layer,
    /// input side first.
    pub fn noisy_pass(
        &self,
        obs: &[f64],
        rng: &mut RandomSource,
        sigma: f64,
    ) -> Result<(PassCache, NoiseRecord)> {
        self.check_input(obs)?;
        let raw: Vec<Vec<f64>> = self.layer_sizes[1..]
            .iter()
            .map(|&m| gaussian_vector(rng, m, sigma))
            .collect();
        let cache = self.forward(obs, Some(&raw));
        Ok((cache, NoiseRecord::new(raw, sigma)))
    }

    /// Mean of `passes` independent noisy output distributions, renormalized.
    pub fn averaged_noisy_output(
        &self,
        obs: &[f64],
        rng: &mut RandomSource,
        sigma: f64,
        passes: usize,
    ) -> Result<Vec<f64>> {
        if passes == 0 {
            return Err(Error::Config("averaged noisy output needs at least one pass".into()));
        }
        let mut mean = vec![0.0; self.action_count()];
        for _ in 0..passes {
            let (cache, _) = self.noisy_pass(obs, rng, sigma)?;
            for (m, p) in mean.iter_mut().zip(cache.probs()) {
                *m += p;
            }
        }
        let total: f64 = mean.iter().sum();
        mean.iter_mut().for_each(|m| *m /= total);
        Ok(mean)
    }

    /// `∂ log π(action | obs) / ∂W^l` for every layer, by reverse
    /// accumulation through the softmax and LeakyReLU layers.
    pub fn grad_logpi(&self, cache: &PassCache, action: usize) -> Result<Vec<Matrix>> {
        if cache.noisy {
            return Err(Error::NoisyCache);
        }
        let probs = cache.probs();
        if action >= probs.len() {
            return Err(Error::InvalidAction {
                action,
                count: probs.len(),
            });
        }
        let depth = self.depth();
        let mut grads = vec![Matrix::zeros(0, 0); depth];
        // d log softmax(h)_a / dh = onehot(a) - y
        let mut upstream: Vec<f64> = probs.iter().map(|&p| -p).collect();
        upstream[action] += 1.0;
        for l in (0..depth).rev() {
            let input = cache.layer_input(l);
            grads[l] = crate::numerics::outer(&upstream, input);
            if l > 0 {
                let mut dx = self.weights[l].transpose_matvec(&upstream);
                for (d, &h) in dx.iter_mut().zip(&cache.pre[l - 1]) {
                    *d *= leaky_relu_derivative(h, self.alpha);
                }
                upstream = dx;
            }
        }
        Ok(grads)
    }
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Config(
            "layer sizes need an input and an output layer".into(),
        ));
    }
    if sizes.contains(&0) {
        return Err(Error::Config("layer sizes must be positive".into()));
    }
    Ok(())
}

impl PassCache {
    pub fn probs(&self) -> &[f64] {
        self.act.last().unwrap()
    }

    pub fn is_noisy(&self) -> bool {
        self.noisy
    }

    pub fn depth(&self) -> usize {
        self.pre.len()
    }

    /// Activity feeding weight layer `l`: the observation for `l = 0`.
    pub fn layer_input(&self, l: usize) -> &[f64] {
        if l == 0 {
            &self.input
        } else {
            &self.act[l - 1]
        }
    }

    pub fn pre_activation(&self, l: usize) -> &[f64] {
        &self.pre[l]
    }

    pub fn activation(&self, l: usize) -> &[f64] {
        &self.act[l]
    }
}

impl NoiseRecord {
    /// Stores `ξ` per layer together with `ξ/‖ξ‖²` (zero when `ξ = 0`).
    pub fn new(raw: Vec<Vec<f64>>, sigma: f64) -> Self {
        let scaled = raw
            .iter()
            .map(|xi| {
                let n2 = norm_sq(xi);
                if n2 > 0.0 {
                    xi.iter().map(|x| x / n2).collect()
                } else {
                    vec![0.0; xi.len()]
                }
            })
            .collect();
        Self { raw, scaled, sigma }
    }

    pub fn raw(&self, l: usize) -> &[f64] {
        &self.raw[l]
    }

    pub fn scaled(&self, l: usize) -> &[f64] {
        &self.scaled[l]
    }

    pub fn depth(&self) -> usize {
        self.raw.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Draws an index from a categorical distribution using one uniform draw.
pub fn sample_action(probs: &[f64], rng: &mut RandomSource) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("no actions".into()));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "negative or non-finite entry in {probs:?}"
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    let u = rng.uniform();
    let mut cumulative = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return Ok(i);
        }
    }
    // Rounding left u above the last partial sum.
    Ok(probs.iter().rposition(|&p| p > 0.0).unwrap())
}

/// `ln max(probs[action], PROB_FLOOR)`.
pub fn log_prob(probs: &[f64], action: usize) -> f64 {
    probs[action].max(PROB_FLOOR).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot, DEFAULT_LEAKY_SLOPE};

    fn random_net(sizes: &[usize], seed: u64) -> PolicyNetwork {
        PolicyNetwork::new(sizes, DEFAULT_LEAKY_SLOPE, &mut RandomSource::new(seed)).unwrap()
    }

    #[test]
    fn zero_weights_give_uniform_output() {
        let net = PolicyNetwork::zeros(&[3, 4], DEFAULT_LEAKY_SLOPE).unwrap();
        let cache = net.clean_pass(&[0.3, -2.0, 9.0]).unwrap();
        for p in cache.probs() {
            assert!((p - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_layer_hand_evaluation() {
        let net =
            PolicyNetwork::from_weights(vec![Matrix::identity(2)], DEFAULT_LEAKY_SLOPE).unwrap();
        let cache = net.clean_pass(&[3f64.ln(), 0.0]).unwrap();
        assert!((cache.probs()[0] - 0.75).abs() < 1e-15);
        assert!((cache.probs()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn clean_pass_is_deterministic() {
        let net = random_net(&[4, 8, 3], 1);
        let obs = [0.1, -0.4, 1.3, 0.0];
        assert_eq!(net.clean_pass(&obs).unwrap(), net.clean_pass(&obs).unwrap());
    }

    #[test]
    fn wrong_input_dimension_is_rejected() {
        let net = random_net(&[4, 8, 3], 1);
        assert!(matches!(
            net.clean_pass(&[1.0, 2.0]),
            Err(Error::Dimension { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn zero_sigma_noisy_pass_matches_clean_bitwise() {
        let net = random_net(&[5, 16, 16, 3], 9);
        let obs = [0.5, -1.0, 0.25, 2.0, -0.1];
        let clean = net.clean_pass(&obs).unwrap();
        let (noisy, noise) = net.noisy_pass(&obs, &mut RandomSource::new(2), 0.0).unwrap();
        for l in 0..clean.depth() {
            assert_eq!(clean.activation(l), noisy.activation(l));
            assert_eq!(clean.pre_activation(l), noisy.pre_activation(l));
            assert!(noise.scaled(l).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn noisy_pass_same_seed_identical() {
        let net = random_net(&[4, 8, 3], 3);
        let obs = [1.0, 0.0, -1.0, 0.5];
        let a = net.noisy_pass(&obs, &mut RandomSource::new(77), 0.1).unwrap();
        let b = net.noisy_pass(&obs, &mut RandomSource::new(77), 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noisy_pass_perturbation_is_first_order_in_sigma() {
        let net = random_net(&[6, 32, 32, 3], 4);
        let obs = [0.2, -0.7, 1.1, 0.4, -0.3, 0.9];
        let clean = net.clean_pass(&obs).unwrap();
        let sigma = 1e-3;
        let mut worst: f64 = 0.0;
        for seed in 0..100 {
            let (noisy, _) = net
                .noisy_pass(&obs, &mut RandomSource::new(seed), sigma)
                .unwrap();
            for l in 0..clean.depth() {
                let d: f64 = clean
                    .activation(l)
                    .iter()
                    .zip(noisy.activation(l))
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(d / sigma);
            }
        }
        // The ratio stays O(1): no amplification beyond the layer widths.
        assert!(worst > 0.0 && worst < 50.0, "max ‖x̃−x‖/σ = {worst}");
    }

    #[test]
    fn noise_record_scaling_inverts_norm() {
        let net = random_net(&[4, 8, 8, 3], 5);
        for seed in 0..20 {
            let (_, noise) = net
                .noisy_pass(&[1.0, 2.0, 3.0, 4.0], &mut RandomSource::new(seed), 1e-3)
                .unwrap();
            for l in 0..noise.depth() {
                assert!((dot(noise.scaled(l), noise.raw(l)) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sample_action_degenerate_distributions() {
        let mut rng = RandomSource::new(0);
        for _ in 0..1000 {
            assert_eq!(sample_action(&[1.0, 0.0, 0.0], &mut rng).unwrap(), 0);
            assert_eq!(sample_action(&[0.0, 1.0], &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn sample_action_fair_coin_frequency() {
        let mut rng = RandomSource::new(12);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| sample_action(&[0.5, 0.5], &mut rng).unwrap() == 0)
            .count();
        let freq = zeros as f64 / n as f64;
        assert!((0.49..=0.51).contains(&freq), "freq {freq}");
    }

    #[test]
    fn sample_action_rejects_invalid_distributions() {
        let mut rng = RandomSource::new(0);
        assert!(sample_action(&[0.7, 0.7], &mut rng).is_err());
        assert!(sample_action(&[1.5, -0.5], &mut rng).is_err());
        assert!(sample_action(&[f64::NAN, 1.0], &mut rng).is_err());
        assert!(sample_action(&[], &mut rng).is_err());
    }

    #[test]
    fn log_prob_values() {
        let e = std::f64::consts::E;
        assert!((log_prob(&[1.0 / e, 1.0 - 1.0 / e], 0) + 1.0).abs() < 1e-15);
        assert!((log_prob(&[0.25; 4], 2) + 4f64.ln()).abs() < 1e-15);
        assert_eq!(log_prob(&[1.0, 1e-20], 1), PROB_FLOOR.ln());
    }

    #[test]
    fn log_probs_exponentiate_to_one() {
        let net = random_net(&[4, 8, 5], 8);
        let cache = net.clean_pass(&[0.3, 0.1, -0.2, 0.7]).unwrap();
        let total: f64 = (0..5).map(|a| log_prob(cache.probs(), a).exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_layer_gradient_is_softmax_identity() {
        let net = random_net(&[3, 4], 6);
        let obs = [0.5, -1.5, 2.0];
        let cache = net.clean_pass(&obs).unwrap();
        let g = net.grad_logpi(&cache, 2).unwrap();
        for i in 0..4 {
            let coeff = if i == 2 { 1.0 } else { 0.0 } - cache.probs()[i];
            for j in 0..3 {
                assert!((g[0][(i, j)] - coeff * obs[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_net_two_action_gradient() {
        let net = PolicyNetwork::zeros(&[2, 2], DEFAULT_LEAKY_SLOPE).unwrap();
        let obs = [3.0, -4.0];
        let g = net.grad_logpi(&net.clean_pass(&obs).unwrap(), 0).unwrap();
        assert_eq!(g[0].row(0), &[1.5, -2.0]);
        assert_eq!(g[0].row(1), &[-1.5, 2.0]);
    }

    #[test]
    fn gradient_rejects_noisy_cache() {
        let net = random_net(&[2, 3], 1);
        let (cache, _) = net
            .noisy_pass(&[1.0, 1.0], &mut RandomSource::new(0), 0.1)
            .unwrap();
        assert!(matches!(net.grad_logpi(&cache, 0), Err(Error::NoisyCache)));
    }

    #[test]
    fn averaged_output_with_zero_sigma_is_clean() {
        let net = random_net(&[4, 8, 3], 2);
        let obs = [0.0, 1.0, 0.5, -0.5];
        let clean = net.clean_pass(&obs).unwrap();
        let avg = net
            .averaged_noisy_output(&obs, &mut RandomSource::new(1), 0.0, 7)
            .unwrap();
        for (a, b) in avg.iter().zip(clean.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn from_weights_rejects_incompatible_shapes() {
        let w = vec![Matrix::zeros(3, 2), Matrix::zeros(2, 4)];
        assert!(PolicyNetwork::from_weights(w, 0.01).is_err());
    }
}
