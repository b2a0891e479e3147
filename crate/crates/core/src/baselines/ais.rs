use rayon::prelude::*;

use super::TemperatureLadder;
use crate::error::{check_dim, Error, Result};
use crate::extended::{GaussianInstrumental, InstrumentalDistribution, WeightedSampleSet};
use crate::hmc::{ChainState, HmcConfig, LogDensity};
use crate::math::log_sum_exp;
use crate::rng::stream_rng;
use crate::targets::TargetDensity;

/// Geometric bridge `log π_β = −β φ − (1 − β) δ` between a base and a target.
pub struct Bridge<'a, T, Q> {
    pub target: &'a T,
    pub base: &'a Q,
    pub beta: f64,
}

impl<T: TargetDensity, Q: InstrumentalDistribution> LogDensity for Bridge<'_, T, Q> {
    fn dim(&self) -> usize {
        self.target.dim()
    }

    fn log_density(&self, y: &[f64]) -> f64 {
        -self.beta * self.target.potential(y) - (1.0 - self.beta) * self.base.delta(y)
    }

    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let mut base_grad = vec![0.0; y.len()];
        let phi = self.target.potential_and_gradient(y, grad);
        let delta = self.base.delta_and_gradient(y, &mut base_grad);
        for (g, b) in grad.iter_mut().zip(&base_grad) {
            *g = -self.beta * *g - (1.0 - self.beta) * b;
        }
        -self.beta * phi - (1.0 - self.beta) * delta
    }
}

/// Output of [`annealed_importance_sampling`].
#[derive(Debug, Clone)]
pub struct AisRun {
    /// One row holding every particle with a finite log-weight.
    pub samples: WeightedSampleSet,
    /// `log Ẑ = log Z_base + log mean(exp(log w))`, with `Z = ∫ exp{−φ}`.
    pub log_z: f64,
    /// Particles dropped because their log-weight was not finite.
    pub excluded: usize,
}

/// Annealed importance sampling from the Gaussian `base` to `target`.
///
/// Each particle starts from an exact base draw with `β_0 = 0` and, for each
/// rung, adds `(β_t − β_{t−1})(−φ(x) + δ(x))` to its log-weight and then
/// moves with `kernel` at `β_t`. No move is made at the final rung, so the
/// ladder `[1]` is plain importance sampling from the base. Particle `p`
/// uses stream `p` of `kernel.seed`.
pub fn annealed_importance_sampling<T: TargetDensity>(
    target: &T,
    base: &GaussianInstrumental,
    ladder: &TemperatureLadder,
    kernel: &HmcConfig,
    n_particles: usize,
    seed: u64,
) -> Result<AisRun> {
    let dim = target.dim();
    check_dim(dim, base.dim())?;
    let hmc = kernel.kernel(dim)?;
    let bridges: Vec<Bridge<'_, T, GaussianInstrumental>> =
        ladder.betas().iter().map(|b| Bridge { target, base, beta: *b }).collect();

    let particles: Vec<(Vec<f64>, f64)> = (0..n_particles)
        .into_par_iter()
        .map(|p| {
            let mut rng = stream_rng(seed, p as u64);
            let mut x = vec![0.0; dim];
            base.sample(&mut rng, &mut x);
            let mut log_w = 0.0;
            let mut previous = 0.0;
            let mut chain: Option<ChainState> = None;
            for (t, bridge) in bridges.iter().enumerate() {
                let increment = bridge.beta - previous;
                if increment != 0.0 {
                    log_w += increment * (-target.potential(&x) + base.delta(&x));
                }
                previous = bridge.beta;
                if bridge.beta >= 1.0 || t + 1 == bridges.len() {
                    break;
                }
                let state = match chain.as_mut() {
                    Some(c) => {
                        c.reset_position(bridge, x.clone());
                        c
                    }
                    None => chain.insert(match ChainState::new(bridge, &x, hmc.clone()) {
                        Ok(c) => c,
                        Err(_) => return (x, f64::NAN),
                    }),
                };
                state.step(bridge, &mut rng);
                x.clone_from(&state.point.position);
            }
            (x, log_w)
        })
        .collect();

    let mut samples = WeightedSampleSet::new("ais", dim, 0, seed);
    let mut draws = Vec::with_capacity(n_particles * dim);
    let mut log_weights = Vec::with_capacity(n_particles);
    let mut excluded = 0;
    for (x, log_w) in particles {
        if log_w.is_finite() {
            draws.extend_from_slice(&x);
            log_weights.push(log_w);
        } else {
            excluded += 1;
        }
    }
    if log_weights.is_empty() {
        return Err(Error::EmptyOutput(format!("all {n_particles} AIS particles had non-finite weights")));
    }
    samples.num_pseudo = log_weights.len();
    samples.push_row(&draws, &log_weights, None);
    samples.acceptance_rate = f64::NAN;
    let log_z = base.log_normalizer() + log_sum_exp(&log_weights) - (log_weights.len() as f64).ln();
    Ok(AisRun { samples, log_z, excluded })
}
