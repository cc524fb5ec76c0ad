//! Monte-Carlo checks of the directional-derivative gradient estimator.
//!
//! For isotropic noise `ε` the estimator
//!
//! ```text
//! ĝ = (n/K) Σᵢ εᵢ/‖εᵢ‖² · (f(θ + εᵢ) − f(θ))
//! ```
//!
//! recovers `∇f(θ)` as `σ → 0` and `K → ∞`, because `E[vvᵀ] = I/n` for the
//! unit direction `v = ε/‖ε‖`. The helpers here measure how close finite
//! samples get, against a central-difference oracle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cosine_similarity, norm_sq, Matrix, RandomSource};
use crate::policy::{log_prob, PolicyNetwork};

/// Zero-mean perturbation distributions with per-coordinate scale σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    Gaussian,
    /// Uniform on `[−σ√3, σ√3]` (variance σ²).
    Uniform,
    /// `±σ` with equal probability.
    RademacherBimodal,
}

impl NoiseFamily {
    pub const ALL: [NoiseFamily; 3] = [
        NoiseFamily::Gaussian,
        NoiseFamily::Uniform,
        NoiseFamily::RademacherBimodal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Uniform => "uniform",
            NoiseFamily::RademacherBimodal => "rademacher_bimodal",
        }
    }

    pub fn sample(self, rng: &mut RandomSource, dim: usize, sigma: f64) -> Vec<f64> {
        match self {
            NoiseFamily::Gaussian => crate::numerics::gaussian_vector(rng, dim, sigma),
            NoiseFamily::Uniform => {
                let half = sigma * 3f64.sqrt();
                (0..dim).map(|_| rng.uniform_in(-half, half)).collect()
            }
            NoiseFamily::RademacherBimodal => (0..dim)
                .map(|_| if rng.coin() { sigma } else { -sigma })
                .collect(),
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "uniform" => Ok(NoiseFamily::Uniform),
            "rademacher" | "bimodal" | "rademacher_bimodal" => Ok(NoiseFamily::RademacherBimodal),
            other => Err(Error::Config(format!("unknown noise family `{other}`"))),
        }
    }
}

/// How well an estimate matches a reference gradient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub dimension: usize,
    pub sample_count: usize,
    pub sigma: f64,
    pub noise_family: NoiseFamily,
    pub cosine_similarity: f64,
    /// `‖estimate − reference‖ / ‖reference‖`.
    pub relative_norm_error: f64,
}

impl EstimatorReport {
    pub fn compare(
        estimate: &[f64],
        reference: &[f64],
        sample_count: usize,
        sigma: f64,
        noise_family: NoiseFamily,
    ) -> Result<Self> {
        if !crate::numerics::all_finite(estimate) || !crate::numerics::all_finite(reference) {
            return Err(Error::NonFinite("estimator report input"));
        }
        let diff: Vec<f64> = estimate.iter().zip(reference).map(|(a, b)| a - b).collect();
        let ref_norm = norm_sq(reference).sqrt();
        Ok(Self {
            dimension: reference.len(),
            sample_count,
            sigma,
            noise_family,
            cosine_similarity: cosine_similarity(estimate, reference),
            relative_norm_error: if ref_norm > 0.0 {
                norm_sq(&diff).sqrt() / ref_norm
            } else {
                norm_sq(&diff).sqrt()
            },
        })
    }

    pub const CSV_HEADER: &'static str =
        "n,k,sigma,family,cosine_similarity,relative_norm_error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.dimension,
            self.sample_count,
            self.sigma,
            self.noise_family,
            self.cosine_similarity,
            self.relative_norm_error
        )
    }
}

/// Central differences `(f(θ + h eᵢ) − f(θ − h eᵢ)) / 2h` per coordinate.
pub fn finite_diff_gradient<F>(f: F, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Config(format!("step {h} must be positive")));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = f(&probe);
        probe[i] = theta[i] - h;
        let down = f(&probe);
        probe[i] = theta[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// `(n/K) Σᵢ εᵢ/‖εᵢ‖² · (f(θ + εᵢ) − f(θ))` with `εᵢ` from `family` at scale σ.
pub fn directional_estimate<F>(
    f: F,
    theta: &[f64],
    sigma: f64,
    samples: usize,
    rng: &mut RandomSource,
    family: NoiseFamily,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::Config(format!("noise scale {sigma} must be positive")));
    }
    let n = theta.len();
    let base = f(theta);
    if !base.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    let mut acc = vec![0.0; n];
    let mut probe = vec![0.0; n];
    for _ in 0..samples {
        let eps = family.sample(rng, n, sigma);
        let n2 = norm_sq(&eps);
        if n2 == 0.0 {
            continue;
        }
        for ((p, t), e) in probe.iter_mut().zip(theta).zip(&eps) {
            *p = t + e;
        }
        let value = f(&probe);
        if !value.is_finite() {
            return Err(Error::NonFinite("objective"));
        }
        let coeff = (value - base) / n2;
        for (a, e) in acc.iter_mut().zip(&eps) {
            *a += coeff * e;
        }
    }
    let scale = n as f64 / samples as f64;
    acc.iter_mut().for_each(|a| *a *= scale);
    Ok(acc)
}

/// Empirical `E[vvᵀ]` over `samples` unit directions `v = ε/‖ε‖`, ε Gaussian.
pub fn vv_outer_statistic(n: usize, samples: usize, rng: &mut RandomSource) -> Matrix {
    let mut acc = Matrix::zeros(n, n);
    let mut drawn = 0usize;
    while drawn < samples {
        let eps = crate::numerics::gaussian_vector(rng, n, 1.0);
        let n2 = norm_sq(&eps);
        if n2 == 0.0 {
            continue;
        }
        acc.add_outer(1.0 / n2, &eps, &eps);
        drawn += 1;
    }
    let inv = 1.0 / samples.max(1) as f64;
    acc.as_mut_slice().iter_mut().for_each(|x| *x *= inv);
    acc
}

/// Mean absolute difference between the clean output and the average of
/// `N` noisy outputs, over every observation and action, for each `N`.
pub fn clean_pass_error_curve(
    net: &PolicyNetwork,
    observations: &[Vec<f64>],
    sigma: f64,
    pass_counts: &[usize],
    rng: &mut RandomSource,
) -> Result<Vec<(usize, f64)>> {
    if observations.is_empty() {
        return Err(Error::EmptySeries);
    }
    let clean: Vec<Vec<f64>> = observations
        .iter()
        .map(|o| net.clean_pass(o).map(|c| c.probs().to_vec()))
        .collect::<Result<_>>()?;
    pass_counts
        .iter()
        .map(|&passes| {
            let mut total = 0.0;
            let mut count = 0usize;
            for (obs, reference) in observations.iter().zip(&clean) {
                let avg = net.averaged_noisy_output(obs, rng, sigma, passes)?;
                for (a, c) in avg.iter().zip(reference) {
                    total += (a - c).abs();
                    count += 1;
                }
            }
            Ok((passes, total / count as f64))
        })
        .collect()
}

/// Estimates the gradient with `family` noise and compares it to central
/// differences.
pub fn nongaussian_descent_check<F>(
    f: F,
    theta: &[f64],
    sigma: f64,
    samples: usize,
    family: NoiseFamily,
    rng: &mut RandomSource,
) -> Result<EstimatorReport>
where
    F: Fn(&[f64]) -> f64,
{
    let estimate = directional_estimate(&f, theta, sigma, samples, rng, family)?;
    let reference = finite_diff_gradient(&f, theta, 1e-6)?;
    EstimatorReport::compare(&estimate, &reference, samples, sigma, family)
}

/// Average of the per-layer NRL direction `ξ̄^l ρ (x̃^{l−1})ᵀ` over `draws`
/// noisy passes for a fixed observation and action, with its cosine
/// similarity to `∂ log π / ∂W^l` per layer.
pub fn nrl_direction_alignment(
    net: &PolicyNetwork,
    obs: &[f64],
    action: usize,
    sigma: f64,
    draws: usize,
    rng: &mut RandomSource,
) -> Result<Vec<f64>> {
    let clean = net.clean_pass(obs)?;
    let clean_logp = log_prob(clean.probs(), action);
    let exact = net.grad_logpi(&clean, action)?;
    let mut mean: Vec<Matrix> = exact
        .iter()
        .map(|g| Matrix::zeros(g.rows(), g.cols()))
        .collect();
    for _ in 0..draws {
        let (noisy, noise) = net.noisy_pass(obs, rng, sigma)?;
        let rho = log_prob(noisy.probs(), action) - clean_logp;
        for (l, m) in mean.iter_mut().enumerate() {
            m.add_outer(rho, noise.scaled(l), noisy.layer_input(l));
        }
    }
    Ok(mean
        .iter()
        .zip(&exact)
        .map(|(m, g)| cosine_similarity(m.as_slice(), g.as_slice()))
        .collect())
}

/// Estimator reports on the quadratic `‖θ‖²` for every combination of the
/// given dimensions, sample counts, noise scales, and families.
pub fn quadratic_report_table(
    dims: &[usize],
    sample_counts: &[usize],
    sigmas: &[f64],
    families: &[NoiseFamily],
    seed: u64,
) -> Result<Vec<EstimatorReport>> {
    let root = RandomSource::new(seed);
    let mut reports = Vec::new();
    let mut stream = 0;
    for &n in dims {
        let theta: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).sin()).collect();
        for &k in sample_counts {
            for &sigma in sigmas {
                for &family in families {
                    let mut rng = root.split(stream);
                    stream += 1;
                    reports.push(nongaussian_descent_check(
                        norm_sq,
                        &theta,
                        sigma,
                        k,
                        family,
                        &mut rng,
                    )?);
                }
            }
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(t: &[f64]) -> f64 {
        norm_sq(t)
    }

    #[test]
    fn finite_differences_of_simple_functions() {
        let c = [0.5, -2.0, 3.0];
        let g = finite_diff_gradient(|t| crate::numerics::dot(t, &c), &[1.0, 7.0, -4.0], 1e-6)
            .unwrap();
        for (a, b) in g.iter().zip(&c) {
            assert!((a - b).abs() < 1e-8);
        }
        let g = finite_diff_gradient(quadratic, &[1.0, 2.0], 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 4.0).abs() < 1e-8);
        let g = finite_diff_gradient(|_| 4.2, &[1.0, 2.0], 1e-6).unwrap();
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn finite_differences_reject_non_finite() {
        assert!(finite_diff_gradient(|t| if t[0] > 1.0 { f64::NAN } else { t[0] }, &[1.0], 1e-6).is_err());
        assert!(finite_diff_gradient(quadratic, &[1.0], 0.0).is_err());
    }

    #[test]
    fn single_sample_estimate_is_parallel_to_noise() {
        let theta = [0.3, -1.2, 2.0, 0.7];
        let mut rng = RandomSource::new(5);
        let mut replay = rng.clone();
        let est = directional_estimate(quadratic, &theta, 0.1, 1, &mut rng, NoiseFamily::Gaussian)
            .unwrap();
        let eps = NoiseFamily::Gaussian.sample(&mut replay, 4, 0.1);
        assert!((cosine_similarity(&est, &eps).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_objective_estimate_aligns() {
        let c: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).cos()).collect();
        let theta = vec![0.0; 10];
        let mut rng = RandomSource::new(21);
        let est = directional_estimate(
            |t| crate::numerics::dot(t, &c),
            &theta,
            1e-3,
            10_000,
            &mut rng,
            NoiseFamily::Gaussian,
        )
        .unwrap();
        assert!(cosine_similarity(&est, &c) > 0.99);
    }

    #[test]
    fn quadratic_three_dim_relative_error() {
        let mut rng = RandomSource::new(8);
        let est = directional_estimate(
            quadratic,
            &[1.0, 2.0, 3.0],
            1e-4,
            10_000,
            &mut rng,
            NoiseFamily::Gaussian,
        )
        .unwrap();
        let report =
            EstimatorReport::compare(&est, &[2.0, 4.0, 6.0], 10_000, 1e-4, NoiseFamily::Gaussian)
                .unwrap();
        assert!(report.relative_norm_error < 0.05, "{report:?}");
    }

    #[test]
    fn vv_statistic_scalar_and_trace() {
        let mut rng = RandomSource::new(1);
        let m = vv_outer_statistic(1, 17, &mut rng);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15);
        for samples in [1, 2, 7, 100] {
            let m = vv_outer_statistic(6, samples, &mut rng);
            let trace: f64 = (0..6).map(|i| m[(i, i)]).sum();
            assert!((trace - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sigma_error_curve_is_zero() {
        let net = PolicyNetwork::new(&[3, 8, 2], 0.01, &mut RandomSource::new(2)).unwrap();
        let obs = vec![vec![0.1, 0.2, 0.3], vec![-1.0, 0.0, 1.0]];
        let curve =
            clean_pass_error_curve(&net, &obs, 0.0, &[1, 4], &mut RandomSource::new(0)).unwrap();
        assert!(curve.iter().all(|&(_, e)| e < 1e-15));
        assert!(clean_pass_error_curve(&net, &[], 0.1, &[1], &mut RandomSource::new(0)).is_err());
    }

    #[test]
    fn every_family_finds_linear_gradient() {
        let c: Vec<f64> = (0..8).map(|i| 1.0 + i as f64).collect();
        for family in NoiseFamily::ALL {
            let report = nongaussian_descent_check(
                |t| crate::numerics::dot(t, &c),
                &vec![0.5; 8],
                1e-3,
                10_000,
                family,
                &mut RandomSource::new(3),
            )
            .unwrap();
            assert!(report.cosine_similarity > 0.99, "{family}: {report:?}");
        }
    }

    #[test]
    fn family_moments() {
        for family in NoiseFamily::ALL {
            let v = family.sample(&mut RandomSource::new(4), 100_000, 2.0);
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
            assert!(mean.abs() < 0.03, "{family} mean {mean}");
            assert!((var / 4.0 - 1.0).abs() < 0.03, "{family} var {var}");
        }
    }

    #[test]
    fn family_names_parse() {
        for family in NoiseFamily::ALL {
            assert_eq!(family.name().parse::<NoiseFamily>().unwrap(), family);
        }
    }
}
