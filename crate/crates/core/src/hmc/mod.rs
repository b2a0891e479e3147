//! Hamiltonian Monte Carlo on any differentiable log-density.
//!
//! A [`LogDensity`] is sampled with either fixed-length leapfrog trajectories
//! and a Metropolis correction or with NUTS. Step sizes are tuned by dual
//! averaging during warmup and then frozen.

mod adapt;
mod leapfrog;
mod nuts;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::{stream_rng, CHAIN_STREAM};
use crate::targets::TargetDensity;

pub use adapt::{dual_averaging_adapt, DualAveraging};
pub use leapfrog::{integrate, leapfrog, Divergence, PhasePoint};
pub use nuts::nuts_step;

/// Energy errors above this magnitude count as divergent and are rejected.
pub const DIVERGENCE_THRESHOLD: f64 = 1000.0;

/// Unnormalized log-density on `R^dim` with gradient.
pub trait LogDensity: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density(&self, y: &[f64]) -> f64 {
        let mut grad = vec![0.0; y.len()];
        self.log_density_and_gradient(y, &mut grad)
    }

    /// Writes `∇ log π(y)` into `grad` and returns `log π(y)`.
    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64;
}

impl<D: LogDensity + ?Sized> LogDensity for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density(&self, y: &[f64]) -> f64 {
        (**self).log_density(y)
    }
    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        (**self).log_density_and_gradient(y, grad)
    }
}

/// `log π = −β φ` for a target potential `φ`; `β = 1` is the target itself.
#[derive(Debug, Clone)]
pub struct Tempered<T> {
    pub target: T,
    pub beta: f64,
}

impl<T: TargetDensity> Tempered<T> {
    pub fn new(target: T, beta: f64) -> Self {
        Self { target, beta }
    }
}

impl<T: TargetDensity> LogDensity for Tempered<T> {
    fn dim(&self) -> usize {
        self.target.dim()
    }
    fn log_density(&self, y: &[f64]) -> f64 {
        -self.beta * self.target.potential(y)
    }
    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let phi = self.target.potential_and_gradient(y, grad);
        grad.iter_mut().for_each(|g| *g *= -self.beta);
        -self.beta * phi
    }
}

/// The target itself, `log π = −φ`.
pub fn posterior<T: TargetDensity>(target: T) -> Tempered<T> {
    Tempered::new(target, 1.0)
}

fn default_step_size() -> f64 {
    0.1
}
fn default_num_leapfrog() -> usize {
    10
}
fn default_target_accept() -> f64 {
    0.8
}
fn default_use_nuts() -> bool {
    true
}
fn default_max_tree_depth() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HmcConfig {
    /// Initial step size; replaced by the adapted value when `adapt_steps > 0`.
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default = "default_num_leapfrog")]
    pub num_leapfrog: usize,
    /// Diagonal of the mass matrix `M`; identity when absent.
    #[serde(default)]
    pub mass: Option<Vec<f64>>,
    /// Warmup iterations, discarded and used for step-size adaptation.
    #[serde(default)]
    pub adapt_steps: usize,
    #[serde(default = "default_target_accept")]
    pub target_accept: f64,
    #[serde(default = "default_use_nuts")]
    pub use_nuts: bool,
    #[serde(default = "default_max_tree_depth")]
    pub max_tree_depth: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            step_size: default_step_size(),
            num_leapfrog: default_num_leapfrog(),
            mass: None,
            adapt_steps: 0,
            target_accept: default_target_accept(),
            use_nuts: default_use_nuts(),
            max_tree_depth: default_max_tree_depth(),
            seed: 0,
        }
    }
}

impl HmcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidSpec(format!("step size must be positive, got {}", self.step_size)));
        }
        if self.num_leapfrog == 0 {
            return Err(Error::InvalidSpec("num_leapfrog must be at least 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidSpec(format!("target_accept must lie in (0, 1), got {}", self.target_accept)));
        }
        if self.max_tree_depth == 0 {
            return Err(Error::InvalidSpec("max_tree_depth must be at least 1".into()));
        }
        if let Some(mass) = &self.mass {
            if mass.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
                return Err(Error::InvalidSpec("mass diagonal must be strictly positive".into()));
            }
        }
        Ok(())
    }

    /// The kernel this configuration describes for a state of dimension `dim`.
    pub fn kernel(&self, dim: usize) -> Result<HmcKernel> {
        self.validate()?;
        let inv_mass = match &self.mass {
            Some(mass) => {
                check_dim(dim, mass.len())?;
                mass.iter().map(|m| 1.0 / m).collect()
            }
            None => vec![1.0; dim],
        };
        Ok(HmcKernel {
            step_size: self.step_size,
            num_leapfrog: self.num_leapfrog,
            inv_mass,
            use_nuts: self.use_nuts,
            max_tree_depth: self.max_tree_depth,
        })
    }
}

/// Diagnostics of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// Whether the chain moved to a new point.
    pub accepted: bool,
    /// `min(1, exp(−ΔH))`, averaged over the trajectory for NUTS.
    pub accept_stat: f64,
    /// Energy change between the start and the returned point.
    pub delta_h: f64,
    pub divergent: bool,
    /// NUTS only: the depth limit was reached before a U-turn.
    pub saturated: bool,
    pub tree_depth: usize,
    pub num_steps: usize,
}

/// Draws `ρ ~ N(0, M)` given `M⁻¹`.
pub(crate) fn refresh_momentum<R: Rng + ?Sized>(momentum: &mut [f64], inv_mass: &[f64], rng: &mut R) {
    for (p, m) in momentum.iter_mut().zip(inv_mass) {
        let z: f64 = rng.sample(StandardNormal);
        *p = z / m.sqrt();
    }
}

/// One fixed-length HMC transition with a Metropolis correction on `ΔH`.
pub fn hmc_step<D, R>(
    density: &D,
    current: &PhasePoint,
    step_size: f64,
    num_leapfrog: usize,
    inv_mass: &[f64],
    rng: &mut R,
) -> (PhasePoint, Transition)
where
    D: LogDensity + ?Sized,
    R: Rng + ?Sized,
{
    let mut proposal = current.clone();
    refresh_momentum(&mut proposal.momentum, inv_mass, rng);
    let initial_energy = proposal.hamiltonian(inv_mass);
    let integrated = leapfrog(density, &mut proposal, step_size, num_leapfrog, inv_mass);
    let delta_h = proposal.hamiltonian(inv_mass) - initial_energy;
    let divergent = integrated.is_err() || !delta_h.is_finite() || delta_h.abs() > DIVERGENCE_THRESHOLD;
    let accept_stat = if divergent { 0.0 } else { (-delta_h).exp().min(1.0) };
    let u: f64 = rng.random();
    let accepted = !divergent && u.ln() < -delta_h;
    let mut transition = Transition {
        accepted,
        accept_stat,
        delta_h,
        divergent,
        saturated: false,
        tree_depth: 0,
        num_steps: num_leapfrog,
    };
    if accepted {
        proposal.momentum.iter_mut().for_each(|p| *p = 0.0);
        (proposal, transition)
    } else {
        transition.delta_h = if divergent { delta_h } else { 0.0 };
        let mut next = current.clone();
        next.momentum.iter_mut().for_each(|p| *p = 0.0);
        (next, transition)
    }
}

/// Step size, trajectory settings and inverse mass of an HMC kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct HmcKernel {
    pub step_size: f64,
    pub num_leapfrog: usize,
    pub inv_mass: Vec<f64>,
    pub use_nuts: bool,
    pub max_tree_depth: usize,
}

impl HmcKernel {
    pub fn transition<D, R>(&self, density: &D, current: &PhasePoint, rng: &mut R) -> (PhasePoint, Transition)
    where
        D: LogDensity + ?Sized,
        R: Rng + ?Sized,
    {
        if self.use_nuts {
            nuts_step(density, current, self.step_size, &self.inv_mass, self.max_tree_depth, rng)
        } else {
            hmc_step(density, current, self.step_size, self.num_leapfrog, &self.inv_mass, rng)
        }
    }

    /// Doubles or halves the step size from its current value until the
    /// one-step acceptance probability from `point` crosses one half.
    pub fn find_reasonable_step_size<D, R>(&mut self, density: &D, point: &PhasePoint, rng: &mut R)
    where
        D: LogDensity + ?Sized,
        R: Rng + ?Sized,
    {
        let mut start = point.clone();
        refresh_momentum(&mut start.momentum, &self.inv_mass, rng);
        let initial_energy = start.hamiltonian(&self.inv_mass);
        let log_accept = |eps: f64| {
            let mut trial = start.clone();
            match leapfrog(density, &mut trial, eps, 1, &self.inv_mass) {
                Ok(()) => initial_energy - trial.hamiltonian(&self.inv_mass),
                Err(Divergence) => f64::NEG_INFINITY,
            }
        };
        let threshold = 0.5f64.ln();
        let mut eps = self.step_size;
        let direction = if log_accept(eps) > threshold { 1.0 } else { -1.0 };
        for _ in 0..100 {
            let value = log_accept(eps);
            let keep_going = if direction > 0.0 { value > threshold } else { !(value > threshold) };
            if !keep_going {
                break;
            }
            let next = eps * 2f64.powf(direction);
            if !(next.is_finite() && next > 1e-12 && next < 1e6) {
                break;
            }
            eps = next;
        }
        self.step_size = eps;
    }
}

/// Post-warmup draws of a single chain and its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainResult {
    pub dim: usize,
    /// Row-major `iters × dim` states.
    pub draws: Vec<f64>,
    /// Mean acceptance statistic over the sampling phase; NaN when no draws were taken.
    pub accept_rate: f64,
    pub adapted_eps: f64,
    pub divergence_count: usize,
    pub saturation_count: usize,
    pub total_steps: usize,
}

impl ChainResult {
    pub fn len(&self) -> usize {
        self.draws.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn state(&self, t: usize) -> &[f64] {
        &self.draws[t * self.dim..(t + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.dim.max(1))
    }
}

/// A chain in progress: the current point, its kernel and running counters.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub point: PhasePoint,
    pub kernel: HmcKernel,
    adaptation: Option<DualAveraging>,
    pub divergences: usize,
    pub saturations: usize,
    pub total_steps: usize,
}

impl ChainState {
    pub fn new<D: LogDensity + ?Sized>(density: &D, init: &[f64], kernel: HmcKernel) -> Result<Self> {
        check_dim(density.dim(), init.len())?;
        if init.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("initial state must be finite".into()));
        }
        let point = PhasePoint::at(density, init.to_vec());
        if !point.log_density.is_finite() {
            return Err(Error::InvalidSpec("log-density is not finite at the initial state".into()));
        }
        Ok(Self { point, kernel, adaptation: None, divergences: 0, saturations: 0, total_steps: 0 })
    }

    /// Starts dual averaging after a step-size search from the current point.
    pub fn begin_adaptation<D, R>(&mut self, density: &D, target_accept: f64, rng: &mut R)
    where
        D: LogDensity + ?Sized,
        R: Rng + ?Sized,
    {
        self.kernel.find_reasonable_step_size(density, &self.point, rng);
        self.adaptation = Some(DualAveraging::new(self.kernel.step_size, target_accept));
    }

    /// Freezes the step size at its averaged value.
    pub fn end_adaptation(&mut self) {
        if let Some(da) = self.adaptation.take() {
            self.kernel.step_size = da.final_step();
        }
    }

    pub fn step<D, R>(&mut self, density: &D, rng: &mut R) -> Transition
    where
        D: LogDensity + ?Sized,
        R: Rng + ?Sized,
    {
        let (next, transition) = self.kernel.transition(density, &self.point, rng);
        self.point = next;
        self.divergences += transition.divergent as usize;
        self.saturations += transition.saturated as usize;
        self.total_steps += transition.num_steps;
        if let Some(da) = self.adaptation.as_mut() {
            self.kernel.step_size = da.update(transition.accept_stat);
        }
        transition
    }

    /// Moves the chain to `position`, re-evaluating `density` there.
    pub fn reset_position<D: LogDensity + ?Sized>(&mut self, density: &D, position: Vec<f64>) {
        self.point = PhasePoint::at(density, position);
    }
}

/// Runs `config.adapt_steps` warmup iterations followed by `iters` recorded ones.
pub fn run_chain<D: LogDensity + ?Sized>(density: &D, init: &[f64], iters: usize, config: &HmcConfig) -> Result<ChainResult> {
    let dim = density.dim();
    let kernel = config.kernel(dim)?;
    let mut chain = ChainState::new(density, init, kernel)?;
    let mut rng = stream_rng(config.seed, CHAIN_STREAM);
    if config.adapt_steps > 0 {
        chain.begin_adaptation(density, config.target_accept, &mut rng);
        for _ in 0..config.adapt_steps {
            chain.step(density, &mut rng);
        }
        chain.end_adaptation();
    }
    chain.divergences = 0;
    chain.saturations = 0;
    chain.total_steps = 0;

    let mut draws = Vec::with_capacity(iters * dim);
    let mut accept_sum = 0.0;
    for _ in 0..iters {
        let transition = chain.step(density, &mut rng);
        accept_sum += transition.accept_stat;
        draws.extend_from_slice(&chain.point.position);
    }
    Ok(ChainResult {
        dim,
        draws,
        accept_rate: if iters == 0 { f64::NAN } else { accept_sum / iters as f64 },
        adapted_eps: chain.kernel.step_size,
        divergence_count: chain.divergences,
        saturation_count: chain.saturations,
        total_steps: chain.total_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::GaussianTarget;

    fn gaussian(dim: usize) -> Tempered<GaussianTarget> {
        posterior(GaussianTarget::standard(dim))
    }

    #[test]
    fn leapfrog_matches_harmonic_oscillator_map() {
        let density = gaussian(1);
        let (eps, x0, p0) = (0.1, 0.7, -0.3);
        let (y, rho) = integrate(&density, &[x0], &[p0], eps, 1).unwrap();
        let half = p0 - 0.5 * eps * x0;
        let x1 = x0 + eps * half;
        let p1 = half - 0.5 * eps * x1;
        assert!((y[0] - x1).abs() < 1e-15);
        assert!((rho[0] - p1).abs() < 1e-15);
    }

    #[test]
    fn tiny_steps_are_always_accepted() {
        let density = gaussian(3);
        let mut rng = stream_rng(1, 0);
        let start = PhasePoint::at(&density, vec![0.3, -1.0, 2.0]);
        for _ in 0..50 {
            let (_, t) = hmc_step(&density, &start, 1e-8, 1, &[1.0; 3], &mut rng);
            assert!(t.accepted);
            assert!(t.delta_h.abs() < 1e-12);
        }
    }

    #[test]
    fn flat_density_drifts_and_accepts() {
        let density = posterior(crate::targets::FlatTarget::new(2));
        let mut rng = stream_rng(2, 0);
        let start = PhasePoint::at(&density, vec![0.0, 0.0]);
        let (next, t) = hmc_step(&density, &start, 0.5, 4, &[1.0, 1.0], &mut rng);
        assert!(t.accepted);
        assert_eq!(t.delta_h, 0.0);
        assert!(next.position.iter().any(|v| *v != 0.0));
    }

    #[test]
    fn empty_run_reports_nan_acceptance() {
        let result = run_chain(&gaussian(2), &[0.0, 0.0], 0, &HmcConfig::default()).unwrap();
        assert!(result.is_empty());
        assert!(result.accept_rate.is_nan());
    }

    #[test]
    fn init_dimension_is_checked() {
        assert!(matches!(
            run_chain(&gaussian(2), &[0.0], 10, &HmcConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            HmcConfig { step_size: 0.0, ..HmcConfig::default() },
            HmcConfig { num_leapfrog: 0, ..HmcConfig::default() },
            HmcConfig { target_accept: 1.0, ..HmcConfig::default() },
            HmcConfig { mass: Some(vec![1.0, -1.0]), ..HmcConfig::default() },
        ];
        for config in bad {
            assert!(config.kernel(2).is_err());
        }
    }

    #[test]
    fn divergent_trajectories_are_rejected_and_counted() {
        let config = HmcConfig { step_size: 50.0, num_leapfrog: 20, use_nuts: false, ..HmcConfig::default() };
        let result = run_chain(&gaussian(2), &[1.0, 1.0], 20, &config).unwrap();
        assert!(result.divergence_count > 0);
        assert_eq!(result.state(0), &[1.0, 1.0]);
    }
}
