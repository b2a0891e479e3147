use log::warn;
use rand::Rng;
use rayon::prelude::*;

use super::TemperatureLadder;
use crate::error::{check_dim, Result};
use crate::extended::WeightedSampleSet;
use crate::hmc::{ChainState, HmcConfig, Tempered};
use crate::rng::{stream_rng, SamplerRng, EXCHANGE_STREAM};
use crate::targets::TargetDensity;

/// Log acceptance ratio of exchanging the states of rungs `β_lo < β_hi`.
///
/// `(β_hi − β_lo)(φ(x_hi) − φ(x_lo))`; swapping the arguments of both pairs
/// gives the same value.
pub fn swap_log_ratio(beta_lo: f64, phi_lo: f64, beta_hi: f64, phi_hi: f64) -> f64 {
    (beta_hi - beta_lo) * (phi_hi - phi_lo)
}

/// Output of [`parallel_tempering`].
#[derive(Debug, Clone)]
pub struct PtRun {
    /// The `β = 1` chain, one unit-weight draw per iteration.
    pub samples: WeightedSampleSet,
    /// Acceptance rate of proposed exchanges for each adjacent pair.
    pub swap_acceptance: Vec<f64>,
    pub divergence_count: usize,
}

/// Parallel tempering with one HMC chain per rung on `π_t ∝ exp{−β_t φ}`.
///
/// Rung `t` draws from stream `t` of `kernel.seed`; exchanges use a separate
/// stream. Every `swap_every` iterations (warmup included) the even pairs
/// `(0,1), (2,3), …` and then the odd pairs `(1,2), (3,4), …` propose swaps.
/// With a single rung this is exactly [`crate::hmc::run_chain`].
pub fn parallel_tempering<T: TargetDensity>(
    target: &T,
    ladder: &TemperatureLadder,
    kernel: &HmcConfig,
    init: &[f64],
    iters: usize,
    swap_every: usize,
) -> Result<PtRun> {
    let dim = target.dim();
    check_dim(dim, init.len())?;
    if ladder.len() == 1 {
        warn!("parallel tempering with a single rung is a plain chain");
    }
    let densities: Vec<Tempered<&T>> = ladder.betas().iter().map(|b| Tempered::new(target, *b)).collect();
    let base_kernel = kernel.kernel(dim)?;
    let mut chains = densities
        .iter()
        .map(|d| ChainState::new(d, init, base_kernel.clone()))
        .collect::<Result<Vec<_>>>()?;
    let mut rngs: Vec<SamplerRng> = (0..ladder.len()).map(|t| stream_rng(kernel.seed, t as u64)).collect();
    let mut exchange_rng = stream_rng(kernel.seed, EXCHANGE_STREAM);

    let mut swap_proposed = vec![0usize; ladder.len().saturating_sub(1)];
    let mut swap_accepted = vec![0usize; ladder.len().saturating_sub(1)];
    let mut samples = WeightedSampleSet::new("pt", dim, 1, kernel.seed);
    let mut accept_sum = 0.0;
    let top = ladder.len() - 1;

    if kernel.adapt_steps > 0 {
        chains.par_iter_mut().zip(rngs.par_iter_mut()).zip(densities.par_iter()).for_each(|((c, r), d)| {
            c.begin_adaptation(d, kernel.target_accept, r)
        });
    }
    let total = kernel.adapt_steps + iters;
    for iteration in 0..total {
        if iteration == kernel.adapt_steps {
            for chain in chains.iter_mut() {
                chain.end_adaptation();
                chain.divergences = 0;
            }
        }
        let transitions: Vec<_> = chains
            .par_iter_mut()
            .zip(rngs.par_iter_mut())
            .zip(densities.par_iter())
            .map(|((c, r), d)| c.step(d, r))
            .collect();
        if (iteration + 1) % swap_every.max(1) == 0 && ladder.len() > 1 {
            for parity in [0, 1] {
                let mut lo = parity;
                while lo < top {
                    let hi = lo + 1;
                    let phi_lo = target.potential(&chains[lo].point.position);
                    let phi_hi = target.potential(&chains[hi].point.position);
                    let log_ratio = swap_log_ratio(ladder.betas()[lo], phi_lo, ladder.betas()[hi], phi_hi);
                    let u: f64 = exchange_rng.random();
                    if iteration >= kernel.adapt_steps {
                        swap_proposed[lo] += 1;
                    }
                    if u.ln() < log_ratio {
                        let x_lo = chains[lo].point.position.clone();
                        let x_hi = chains[hi].point.position.clone();
                        chains[lo].reset_position(&densities[lo], x_hi);
                        chains[hi].reset_position(&densities[hi], x_lo);
                        if iteration >= kernel.adapt_steps {
                            swap_accepted[lo] += 1;
                        }
                    }
                    lo += 2;
                }
            }
        }
        if iteration >= kernel.adapt_steps {
            accept_sum += transitions[top].accept_stat;
            samples.push_row(&chains[top].point.position, &[0.0], None);
        }
    }

    samples.acceptance_rate = if iters == 0 { f64::NAN } else { accept_sum / iters as f64 };
    let swap_acceptance = swap_proposed
        .iter()
        .zip(&swap_accepted)
        .map(|(p, a)| if *p == 0 { f64::NAN } else { *a as f64 / *p as f64 })
        .collect();
    Ok(PtRun { samples, swap_acceptance, divergence_count: chains.iter().map(|c| c.divergences).sum() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmc::{posterior, run_chain};
    use crate::targets::GaussianTarget;

    #[test]
    fn swap_ratio_is_symmetric_and_unity_for_equal_states() {
        let a = swap_log_ratio(0.3, 2.5, 0.7, -1.25);
        let b = swap_log_ratio(0.7, -1.25, 0.3, 2.5);
        assert!((a - b).abs() <= 1e-12);
        assert_eq!(swap_log_ratio(0.3, 1.7, 0.7, 1.7), 0.0);
    }

    #[test]
    fn single_rung_reproduces_the_plain_chain() {
        let target = GaussianTarget::standard(2);
        let config = HmcConfig { adapt_steps: 50, seed: 9, ..HmcConfig::default() };
        let ladder = TemperatureLadder::new(vec![1.0]).unwrap();
        let pt = parallel_tempering(&target, &ladder, &config, &[0.5, -0.5], 100, 1).unwrap();
        let chain = run_chain(&posterior(&target), &[0.5, -0.5], 100, &config).unwrap();
        assert_eq!(pt.samples.draws, chain.draws);
        assert!(pt.swap_acceptance.is_empty());
    }
}
