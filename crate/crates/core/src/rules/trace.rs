use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::policy::{log_prob, NoiseRecord, PassCache, PolicyNetwork};

use super::compute_rho;

/// Everything a noise-based rule needs from one timestep.
#[derive(Debug, Clone)]
pub struct StepContext {
    noise: NoiseRecord,
    /// `x̃^{l−1}` for every weight layer, observation first.
    inputs: Vec<Vec<f64>>,
    rho: f64,
    clean_logp: f64,
    noisy_logp: f64,
}

impl StepContext {
    /// Builds the context from a noisy pass, the action taken, and the
    /// reference ("clean") output distribution.
    pub fn new(noisy: &PassCache, noise: NoiseRecord, action: usize, clean_probs: &[f64]) -> Self {
        let inputs = (0..noisy.depth())
            .map(|l| noisy.layer_input(l).to_vec())
            .collect();
        Self::from_parts(
            noise,
            inputs,
            log_prob(clean_probs, action),
            log_prob(noisy.probs(), action),
        )
    }

    pub fn from_parts(
        noise: NoiseRecord,
        inputs: Vec<Vec<f64>>,
        clean_logp: f64,
        noisy_logp: f64,
    ) -> Self {
        Self {
            noise,
            inputs,
            rho: compute_rho(noisy_logp, clean_logp),
            clean_logp,
            noisy_logp,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn clean_logp(&self) -> f64 {
        self.clean_logp
    }

    pub fn noisy_logp(&self) -> f64 {
        self.noisy_logp
    }

    pub fn noise(&self) -> &NoiseRecord {
        &self.noise
    }

    pub fn input(&self, l: usize) -> &[f64] {
        &self.inputs[l]
    }
}

/// Per-layer sum of local plasticity terms since the last reward event.
#[derive(Debug, Clone, PartialEq)]
pub struct EligibilityTrace {
    layers: Vec<Matrix>,
}

impl EligibilityTrace {
    pub fn for_network(net: &PolicyNetwork) -> Self {
        Self {
            layers: net
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|m| m.as_slice().iter().all(|&x| x == 0.0))
    }

    pub fn clear(&mut self) {
        self.layers.iter_mut().for_each(|m| m.fill(0.0));
    }

    fn check_context(&self, ctx: &StepContext) -> Result<()> {
        if ctx.noise.depth() != self.layers.len() || ctx.inputs.len() != self.layers.len() {
            return Err(Error::Dimension {
                expected: self.layers.len(),
                got: ctx.noise.depth().min(ctx.inputs.len()),
            });
        }
        for (l, m) in self.layers.iter().enumerate() {
            if ctx.noise.raw(l).len() != m.rows() {
                return Err(Error::Dimension {
                    expected: m.rows(),
                    got: ctx.noise.raw(l).len(),
                });
            }
            if ctx.inputs[l].len() != m.cols() {
                return Err(Error::Dimension {
                    expected: m.cols(),
                    got: ctx.inputs[l].len(),
                });
            }
        }
        Ok(())
    }

    /// `trace^l += ρ · ξ̄^l (x̃^{l−1})ᵀ` with `ξ̄ = ξ/‖ξ‖²`.
    pub fn nrl_accumulate(&mut self, ctx: &StepContext) -> Result<()> {
        self.check_context(ctx)?;
        if !ctx.rho.is_finite() {
            return Err(Error::NonFinite("noise impact"));
        }
        for (l, m) in self.layers.iter_mut().enumerate() {
            m.add_outer(ctx.rho, ctx.noise.scaled(l), &ctx.inputs[l]);
        }
        Ok(())
    }

    /// `trace^l += ξ^l (x̃^{l−1})ᵀ` with raw noise and no `ρ`.
    pub fn rmhl_accumulate(&mut self, ctx: &StepContext) -> Result<()> {
        self.check_context(ctx)?;
        for (l, m) in self.layers.iter_mut().enumerate() {
            m.add_outer(1.0, ctx.noise.raw(l), &ctx.inputs[l]);
        }
        Ok(())
    }

    /// `trace^l += ∂ log π / ∂W^l`.
    pub fn exact_gradient_accumulate(&mut self, grads: &[Matrix]) -> Result<()> {
        if grads.len() != self.layers.len() {
            return Err(Error::Dimension {
                expected: self.layers.len(),
                got: grads.len(),
            });
        }
        for (m, g) in self.layers.iter().zip(grads) {
            if m.shape() != g.shape() {
                return Err(Error::Dimension {
                    expected: m.as_slice().len(),
                    got: g.as_slice().len(),
                });
            }
        }
        for (m, g) in self.layers.iter_mut().zip(grads) {
            crate::numerics::axpy(1.0, g.as_slice(), m.as_mut_slice());
        }
        Ok(())
    }

    /// `W^l += η δ trace^l`, then zeroes the trace.
    pub fn apply(&mut self, net: &mut PolicyNetwork, delta: f64, eta: f64) -> Result<()> {
        if !delta.is_finite() {
            return Err(Error::NonFinite("reward prediction error"));
        }
        net.add_scaled(eta * delta, &self.layers)?;
        self.clear();
        Ok(())
    }
}
