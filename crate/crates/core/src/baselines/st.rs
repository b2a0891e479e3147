use rand::Rng;

use super::TemperatureLadder;
use crate::error::{check_dim, Error, Result};
use crate::extended::WeightedSampleSet;
use crate::hmc::{ChainState, HmcConfig, Tempered};
use crate::rng::{stream_rng, CHAIN_STREAM, EXCHANGE_STREAM};
use crate::targets::TargetDensity;

/// A state-space move that leaves `exp{−β φ}` invariant for any rung.
pub trait RungKernel {
    type State: Clone;

    fn potential(&self, state: &Self::State) -> f64;

    fn step<R: Rng + ?Sized>(&mut self, state: &mut Self::State, rung: usize, beta: f64, rng: &mut R);
}

/// Visits of a simulated-tempering chain.
#[derive(Debug, Clone)]
pub struct StTrace<S> {
    /// States recorded while the chain sat at the top rung.
    pub top_states: Vec<S>,
    /// Iterations spent at each rung.
    pub occupancy: Vec<usize>,
    pub rung_moves_proposed: usize,
    pub rung_moves_accepted: usize,
}

/// Runs `iters` rounds of a state move at the current rung followed by a
/// Metropolis move to a neighbouring rung. `log_pseudo_prior[t]` is the log
/// prior mass of rung `t`.
pub fn simulated_tempering_with<K, R>(
    kernel: &mut K,
    ladder: &TemperatureLadder,
    log_pseudo_prior: &[f64],
    init: K::State,
    init_rung: usize,
    iters: usize,
    state_rng: &mut R,
    rung_rng: &mut R,
) -> StTrace<K::State>
where
    K: RungKernel,
    R: Rng + ?Sized,
{
    let betas = ladder.betas();
    let top = betas.len() - 1;
    let mut state = init;
    let mut rung = init_rung.min(top);
    let mut trace = StTrace {
        top_states: Vec::new(),
        occupancy: vec![0; betas.len()],
        rung_moves_proposed: 0,
        rung_moves_accepted: 0,
    };
    for _ in 0..iters {
        kernel.step(&mut state, rung, betas[rung], state_rng);
        if top > 0 {
            let up = rung_rng.random::<bool>();
            let u: f64 = rung_rng.random();
            let proposal = if up { rung.checked_add(1).filter(|t| *t <= top) } else { rung.checked_sub(1) };
            if let Some(next) = proposal {
                trace.rung_moves_proposed += 1;
                let phi = kernel.potential(&state);
                let log_ratio = -(betas[next] - betas[rung]) * phi + log_pseudo_prior[next] - log_pseudo_prior[rung];
                if u.ln() < log_ratio {
                    rung = next;
                    trace.rung_moves_accepted += 1;
                }
            }
        }
        trace.occupancy[rung] += 1;
        if rung == top {
            trace.top_states.push(state.clone());
        }
    }
    trace
}

struct HmcRungKernel<'a, T> {
    target: &'a T,
    chain: ChainState,
    base_step: f64,
    rung: usize,
    densities: Vec<Tempered<&'a T>>,
}

impl<T: TargetDensity> RungKernel for HmcRungKernel<'_, T> {
    type State = Vec<f64>;

    fn potential(&self, state: &Vec<f64>) -> f64 {
        self.target.potential(state)
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut Vec<f64>, rung: usize, beta: f64, rng: &mut R) {
        let density = &self.densities[rung];
        if rung != self.rung || self.chain.point.position != *state {
            self.chain.reset_position(density, state.clone());
            self.rung = rung;
        }
        self.chain.kernel.step_size = self.base_step / beta.sqrt();
        self.chain.step(density, rng);
        state.clone_from(&self.chain.point.position);
    }
}

/// Output of [`simulated_tempering`].
#[derive(Debug, Clone)]
pub struct StRun {
    pub samples: WeightedSampleSet,
    pub occupancy: Vec<usize>,
    pub rung_acceptance: f64,
}

/// Simulated tempering with HMC moves. The step size is adapted by a
/// `kernel.adapt_steps` warmup at `β = 1` and scaled by `1/√β_t` on rung `t`.
/// The chain starts at the top rung; every visit to it after warmup is
/// recorded with unit weight.
pub fn simulated_tempering<T: TargetDensity>(
    target: &T,
    ladder: &TemperatureLadder,
    pseudo_prior: Option<&[f64]>,
    kernel: &HmcConfig,
    init: &[f64],
    iters: usize,
) -> Result<StRun> {
    let dim = target.dim();
    check_dim(dim, init.len())?;
    let uniform = vec![0.0; ladder.len()];
    let log_prior = match pseudo_prior {
        Some(p) => {
            check_dim(ladder.len(), p.len())?;
            p
        }
        None => &uniform[..],
    };
    let densities: Vec<Tempered<&T>> = ladder.betas().iter().map(|b| Tempered::new(target, *b)).collect();
    let top = ladder.len() - 1;
    let mut state_rng = stream_rng(kernel.seed, CHAIN_STREAM);
    let mut rung_rng = stream_rng(kernel.seed, EXCHANGE_STREAM);
    let mut chain = ChainState::new(&densities[top], init, kernel.kernel(dim)?)?;
    if kernel.adapt_steps > 0 {
        chain.begin_adaptation(&densities[top], kernel.target_accept, &mut state_rng);
        for _ in 0..kernel.adapt_steps {
            chain.step(&densities[top], &mut state_rng);
        }
        chain.end_adaptation();
    }
    let start = chain.point.position.clone();
    let base_step = chain.kernel.step_size;
    let mut rung_kernel = HmcRungKernel { target, chain, base_step, rung: top, densities };
    let trace = simulated_tempering_with(
        &mut rung_kernel,
        ladder,
        log_prior,
        start,
        top,
        iters,
        &mut state_rng,
        &mut rung_rng,
    );
    if iters > 0 && trace.top_states.is_empty() {
        return Err(Error::EmptyOutput(format!(
            "simulated tempering never visited β = 1; rung occupancy {:?}",
            trace.occupancy
        )));
    }
    let mut samples = WeightedSampleSet::new("st", dim, 1, kernel.seed);
    for state in &trace.top_states {
        samples.push_row(state, &[0.0], None);
    }
    samples.acceptance_rate = if iters == 0 { f64::NAN } else { trace.top_states.len() as f64 / iters as f64 };
    let rung_acceptance = if trace.rung_moves_proposed == 0 {
        f64::NAN
    } else {
        trace.rung_moves_accepted as f64 / trace.rung_moves_proposed as f64
    };
    Ok(StRun { samples, occupancy: trace.occupancy, rung_acceptance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmc::{posterior, run_chain};
    use crate::targets::GaussianTarget;

    #[test]
    fn single_rung_is_a_plain_chain() {
        let target = GaussianTarget::standard(2);
        let config = HmcConfig { adapt_steps: 30, seed: 4, ..HmcConfig::default() };
        let ladder = TemperatureLadder::new(vec![1.0]).unwrap();
        let st = simulated_tempering(&target, &ladder, None, &config, &[0.1, 0.2], 80).unwrap();
        let chain = run_chain(&posterior(&target), &[0.1, 0.2], 80, &config).unwrap();
        assert_eq!(st.samples.draws, chain.draws);
    }
}
