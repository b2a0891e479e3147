use super::ExtendedState;
use crate::error::{check_dim, Error, Result};
use crate::hmc::LogDensity;
use crate::math::{sigmoid, softmax_into, softplus};
use crate::targets::TargetDensity;
use std::sync::Arc;

/// A log-density over `β ∈ (0, 1)` together with its derivative. Used both
/// for the user target `π(β)` and for the instrumental weight `g(β)`.
pub trait TemperatureDensity: Send + Sync {
    fn log_density(&self, beta: f64) -> f64;
    fn d_log_density(&self, beta: f64) -> f64;
}

/// `∝ 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatTemperature;

impl TemperatureDensity for FlatTemperature {
    fn log_density(&self, _beta: f64) -> f64 {
        0.0
    }
    fn d_log_density(&self, _beta: f64) -> f64 {
        0.0
    }
}

/// `∝ β^exponent`.
#[derive(Debug, Clone, Copy)]
pub struct PowerTemperature {
    pub exponent: f64,
}

impl TemperatureDensity for PowerTemperature {
    fn log_density(&self, beta: f64) -> f64 {
        self.exponent * beta.ln()
    }
    fn d_log_density(&self, beta: f64) -> f64 {
        self.exponent / beta
    }
}

/// Tempered pseudo-extended target over `(x_1:N, u_1:N)` with `β_i = sigmoid(u_i)`:
///
/// ```text
/// log π^N = logsumexp_i{ −(1 − β_i)φ(x_i) + log π(β_i) − log g(β_i) }
///         + Σ_j { −β_j φ(x_j) + log g(β_j) } + Σ_j log β_j(1 − β_j)
/// ```
///
/// The last sum is the Jacobian of the logit transform. `Z` and the
/// instrumental normalizer `C` are constants and never evaluated.
#[derive(Clone)]
pub struct TemperedExtendedTarget<T> {
    base: T,
    num_pseudo: usize,
    log_pi_beta: Arc<dyn TemperatureDensity>,
    log_g: Arc<dyn TemperatureDensity>,
}

impl<T: TargetDensity> TemperedExtendedTarget<T> {
    /// Uses `π(β) ∝ 1` and `g(β) ∝ 1`.
    pub fn new(base: T, num_pseudo: usize) -> Result<Self> {
        Self::with_temperature_densities(base, num_pseudo, Arc::new(FlatTemperature), Arc::new(FlatTemperature))
    }

    pub fn with_temperature_densities(
        base: T,
        num_pseudo: usize,
        log_pi_beta: Arc<dyn TemperatureDensity>,
        log_g: Arc<dyn TemperatureDensity>,
    ) -> Result<Self> {
        if num_pseudo == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        Ok(Self { base, num_pseudo, log_pi_beta, log_g })
    }

    pub fn base(&self) -> &T {
        &self.base
    }

    pub fn num_pseudo(&self) -> usize {
        self.num_pseudo
    }

    pub fn log_pi_beta(&self) -> &dyn TemperatureDensity {
        self.log_pi_beta.as_ref()
    }

    pub fn log_g(&self) -> &dyn TemperatureDensity {
        self.log_g.as_ref()
    }

    /// Post-hoc log-weights `log γ(x_i)π(β_i) / (γ_{β_i}(x_i) g(β_i))` at a flat point.
    pub fn log_weights(&self, y: &[f64]) -> Vec<f64> {
        let d = self.base.dim();
        let n = self.num_pseudo;
        (0..n)
            .map(|i| {
                let phi = self.base.potential(&y[i * d..(i + 1) * d]);
                tempered_log_weight(phi, sigmoid(y[n * d + i]), self.log_pi_beta.as_ref(), self.log_g.as_ref())
            })
            .collect()
    }

    fn evaluate(&self, y: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let d = self.base.dim();
        let n = self.num_pseudo;
        let us = &y[n * d..];
        let mut phis = vec![0.0; n];
        let mut terms = vec![0.0; n];
        let mut rest = 0.0;
        let mut grad = grad;
        for i in 0..n {
            let x = &y[i * d..(i + 1) * d];
            let phi = match grad.as_deref_mut() {
                Some(g) => self.base.potential_and_gradient(x, &mut g[i * d..(i + 1) * d]),
                None => self.base.potential(x),
            };
            let u = us[i];
            let beta = sigmoid(u);
            phis[i] = phi;
            terms[i] = tempered_log_weight(phi, beta, self.log_pi_beta.as_ref(), self.log_g.as_ref());
            // log β + log(1 − β) = −softplus(−u) − softplus(u)
            rest += -beta * phi + self.log_g.log_density(beta) - softplus(-u) - softplus(u);
        }
        let mut w = vec![0.0; n];
        let lse = softmax_into(&terms, &mut w);
        if let Some(g) = grad {
            for i in 0..n {
                let beta = sigmoid(us[i]);
                let scale = -(w[i] * (1.0 - beta) + beta);
                g[i * d..(i + 1) * d].iter_mut().for_each(|v| *v *= scale);
                let dpi = self.log_pi_beta.d_log_density(beta);
                let dg = self.log_g.d_log_density(beta);
                let d_beta = w[i] * (phis[i] + dpi - dg) - phis[i] + dg;
                g[n * d + i] = beta * (1.0 - beta) * d_beta + 1.0 - 2.0 * beta;
            }
        }
        lse + rest
    }
}

pub(crate) fn tempered_log_weight(
    phi: f64,
    beta: f64,
    log_pi_beta: &dyn TemperatureDensity,
    log_g: &dyn TemperatureDensity,
) -> f64 {
    -(1.0 - beta) * phi + log_pi_beta.log_density(beta) - log_g.log_density(beta)
}

impl<T: TargetDensity> LogDensity for TemperedExtendedTarget<T> {
    fn dim(&self) -> usize {
        self.num_pseudo * (self.base.dim() + 1)
    }

    fn log_density(&self, y: &[f64]) -> f64 {
        self.evaluate(y, None)
    }

    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(y, Some(grad))
    }
}

fn check_state<T: TargetDensity>(state: &ExtendedState, tgt: &TemperedExtendedTarget<T>) -> Result<()> {
    check_dim(tgt.base.dim(), state.dim())?;
    check_dim(tgt.num_pseudo, state.num_pseudo())?;
    if state.us().is_none() {
        return Err(Error::InvalidSpec("tempered density needs temperatures".into()));
    }
    Ok(())
}

pub fn tempered_log_density<T: TargetDensity>(state: &ExtendedState, tgt: &TemperedExtendedTarget<T>) -> Result<f64> {
    check_state(state, tgt)?;
    Ok(tgt.log_density(&state.to_flat()))
}

/// Gradient over the flat `(x_1:N, u_1:N)` layout.
pub fn tempered_gradient<T: TargetDensity>(state: &ExtendedState, tgt: &TemperedExtendedTarget<T>) -> Result<Vec<f64>> {
    check_state(state, tgt)?;
    let mut grad = vec![0.0; tgt.dim()];
    tgt.log_density_and_gradient(&state.to_flat(), &mut grad);
    Ok(grad)
}
