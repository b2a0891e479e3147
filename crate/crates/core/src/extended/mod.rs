//! Pseudo-extended targets and post-hoc weighting.
//!
//! With `N` pseudo-samples and an instrumental density `q ∝ exp{-δ}`, the
//! extended target is
//!
//! ```text
//! π^N(x_1:N) ∝ { Σ_i γ(x_i)/q(x_i) } · Π_i q(x_i)
//! ```
//!
//! whose log-density is `logsumexp_i{-φ(x_i) + δ(x_i)} − Σ_i δ(x_i)` (the
//! `−log N` and `log Z` constants are dropped everywhere). The tempered variant
//! pairs every pseudo-sample with an inverse temperature `β_i = sigmoid(u_i)`
//! and uses `q(x, β) ∝ exp{-βφ(x)} g(β)` as the instrumental density.
//!
//! Draws from either target are turned into estimates under `π` by weighting
//! each pseudo-sample with `γ(x_i)/q(x_i)`, self-normalized within its row.

mod instrumental;
mod samples;
mod tempered;

pub use instrumental::{GaussianInstrumental, InstrumentalDistribution};
pub use samples::{SampleSummary, WeightedSampleSet};
pub use tempered::{
    tempered_gradient, tempered_log_density, FlatTemperature, PowerTemperature, TemperatureDensity,
    TemperedExtendedTarget,
};

use crate::error::{check_dim, Error, Result};
use crate::hmc::LogDensity;
use crate::math::{log_sum_exp, softmax_into};
use crate::targets::TargetDensity;

/// A point `(x_1:N, u_1:N)` of the extended space in unconstrained coordinates.
///
/// The flat layout used by the samplers is all `x_i` blocks back to back,
/// followed by the `u_i` when temperatures are present.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    num_pseudo: usize,
    dim: usize,
    xs: Vec<f64>,
    us: Option<Vec<f64>>,
}

impl ExtendedState {
    pub fn new(xs: Vec<Vec<f64>>, us: Option<Vec<f64>>) -> Result<Self> {
        let num_pseudo = xs.len();
        if num_pseudo == 0 {
            return Err(Error::InvalidSpec("an extended state needs at least one pseudo-sample".into()));
        }
        let dim = xs[0].len();
        for x in &xs {
            check_dim(dim, x.len())?;
        }
        if let Some(us) = &us {
            check_dim(num_pseudo, us.len())?;
        }
        let state = Self { num_pseudo, dim, xs: xs.concat(), us };
        if !state.to_flat().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidSpec("extended state coordinates must be finite".into()));
        }
        Ok(state)
    }

    pub fn from_flat(flat: &[f64], num_pseudo: usize, dim: usize, tempered: bool) -> Result<Self> {
        let expected = num_pseudo * dim + if tempered { num_pseudo } else { 0 };
        check_dim(expected, flat.len())?;
        let xs = flat[..num_pseudo * dim].to_vec();
        let us = tempered.then(|| flat[num_pseudo * dim..].to_vec());
        Ok(Self { num_pseudo, dim, xs, us })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.xs.clone();
        if let Some(us) = &self.us {
            flat.extend_from_slice(us);
        }
        flat
    }

    pub fn num_pseudo(&self) -> usize {
        self.num_pseudo
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn us(&self) -> Option<&[f64]> {
        self.us.as_deref()
    }

    pub fn betas(&self) -> Option<Vec<f64>> {
        self.us.as_ref().map(|us| us.iter().map(|u| crate::math::sigmoid(*u)).collect())
    }
}

/// Pseudo-extended target with a fixed instrumental density.
#[derive(Debug, Clone)]
pub struct ExtendedTarget<T, Q> {
    target: T,
    instrumental: Q,
    num_pseudo: usize,
}

impl<T: TargetDensity, Q: InstrumentalDistribution> ExtendedTarget<T, Q> {
    pub fn new(target: T, instrumental: Q, num_pseudo: usize) -> Result<Self> {
        check_dim(target.dim(), instrumental.dim())?;
        if num_pseudo == 0 {
            return Err(Error::InvalidSpec("N must be at least 1".into()));
        }
        Ok(Self { target, instrumental, num_pseudo })
    }

    pub fn num_pseudo(&self) -> usize {
        self.num_pseudo
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    /// Unnormalized post-hoc log-weights `−φ(x_i) + δ(x_i)` for a flat point.
    pub fn log_weights(&self, y: &[f64]) -> Vec<f64> {
        let d = self.target.dim();
        y.chunks_exact(d)
            .take(self.num_pseudo)
            .map(|x| plain_log_weight(self.target.potential(x), self.instrumental.delta(x)))
            .collect()
    }
}

/// `log γ(x)/q(x)` for the fixed-instrumental variant.
pub fn plain_log_weight(potential: f64, delta: f64) -> f64 {
    -potential + delta
}

/// Extended log-density from per-sample potentials `φ(x_i)` and `δ(x_i)`.
pub fn plain_extended_log_density(potentials: &[f64], deltas: &[f64]) -> f64 {
    let terms: Vec<f64> = potentials.iter().zip(deltas).map(|(p, d)| plain_log_weight(*p, *d)).collect();
    log_sum_exp(&terms) - deltas.iter().sum::<f64>()
}

impl<T: TargetDensity, Q: InstrumentalDistribution> LogDensity for ExtendedTarget<T, Q> {
    fn dim(&self) -> usize {
        self.num_pseudo * self.target.dim()
    }

    fn log_density(&self, y: &[f64]) -> f64 {
        let d = self.target.dim();
        let (phis, deltas): (Vec<f64>, Vec<f64>) = y
            .chunks_exact(d)
            .map(|x| (self.target.potential(x), self.instrumental.delta(x)))
            .unzip();
        plain_extended_log_density(&phis, &deltas)
    }

    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.target.dim();
        let n = self.num_pseudo;
        let mut terms = vec![0.0; n];
        let mut delta_grads = vec![0.0; n * d];
        let mut delta_sum = 0.0;
        for i in 0..n {
            let x = &y[i * d..(i + 1) * d];
            let phi = self.target.potential_and_gradient(x, &mut grad[i * d..(i + 1) * d]);
            let delta = self.instrumental.delta_and_gradient(x, &mut delta_grads[i * d..(i + 1) * d]);
            terms[i] = plain_log_weight(phi, delta);
            delta_sum += delta;
        }
        let mut w = vec![0.0; n];
        let lse = softmax_into(&terms, &mut w);
        for i in 0..n {
            let block = &mut grad[i * d..(i + 1) * d];
            let dg = &delta_grads[i * d..(i + 1) * d];
            for (g, gd) in block.iter_mut().zip(dg) {
                // w_k (−∇φ + ∇δ) − ∇δ
                *g = w[i] * (-*g + gd) - gd;
            }
        }
        lse - delta_sum
    }
}

/// Extended log-density of `state` (fixed-instrumental variant).
pub fn extended_log_density<T, Q>(state: &ExtendedState, target: &T, q: &Q) -> Result<f64>
where
    T: TargetDensity,
    Q: InstrumentalDistribution,
{
    check_dim(target.dim(), state.dim())?;
    check_dim(target.dim(), q.dim())?;
    let (phis, deltas): (Vec<f64>, Vec<f64>) = (0..state.num_pseudo())
        .map(|i| (target.potential(state.x(i)), q.delta(state.x(i))))
        .unzip();
    Ok(plain_extended_log_density(&phis, &deltas))
}

/// Gradient of [`extended_log_density`] with respect to the flat `x_1:N`.
pub fn extended_gradient<T, Q>(state: &ExtendedState, target: &T, q: &Q) -> Result<Vec<f64>>
where
    T: TargetDensity,
    Q: InstrumentalDistribution,
{
    check_dim(target.dim(), state.dim())?;
    let ext = ExtendedTarget::new(target, q, state.num_pseudo())?;
    let flat = state.to_flat();
    let mut grad = vec![0.0; ext.dim()];
    ext.log_density_and_gradient(&flat[..ext.dim()], &mut grad);
    Ok(grad)
}

/// Post-hoc log-weights of the pseudo-samples in `state`.
pub enum WeightScheme<'a> {
    Plain(&'a dyn InstrumentalDistribution),
    Tempered { log_pi_beta: &'a dyn TemperatureDensity, log_g: &'a dyn TemperatureDensity },
}

pub fn posthoc_log_weights<T: TargetDensity>(
    state: &ExtendedState,
    target: &T,
    scheme: WeightScheme<'_>,
) -> Result<Vec<f64>> {
    check_dim(target.dim(), state.dim())?;
    let n = state.num_pseudo();
    match scheme {
        WeightScheme::Plain(q) => Ok((0..n)
            .map(|i| plain_log_weight(target.potential(state.x(i)), q.delta(state.x(i))))
            .collect()),
        WeightScheme::Tempered { log_pi_beta, log_g } => {
            let betas = state
                .betas()
                .ok_or_else(|| Error::InvalidSpec("tempered weights need temperatures".into()))?;
            Ok((0..n)
                .map(|i| {
                    tempered::tempered_log_weight(target.potential(state.x(i)), betas[i], log_pi_beta, log_g)
                })
                .collect())
        }
    }
}

/// Self-normalizes one row of log-weights.
pub fn self_normalize(log_weights: &[f64]) -> Option<Vec<f64>> {
    if log_weights.iter().any(|w| w.is_nan()) {
        return None;
    }
    let lse = log_sum_exp(log_weights);
    if !lse.is_finite() {
        return None;
    }
    Some(log_weights.iter().map(|w| (w - lse).exp()).collect())
}
