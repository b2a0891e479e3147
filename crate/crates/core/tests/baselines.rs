use pseudoext_core::baselines::{
    annealed_importance_sampling, parallel_tempering, simulated_tempering, simulated_tempering_with, swap_log_ratio,
    RungKernel, TemperatureLadder,
};
use pseudoext_core::boltzmann::{enumerate_exact, generate_relaxation, relaxation_target};
use pseudoext_core::extended::GaussianInstrumental;
use pseudoext_core::harness::compute_rmse;
use pseudoext_core::hmc::HmcConfig;
use pseudoext_core::rng::stream_rng;
use pseudoext_core::targets::{build_mixture_target, GaussianTarget, MixtureSpec};
use rand::Rng;

/// Two-state space with an exact Gibbs redraw at each rung.
struct TwoStates {
    phi: [f64; 2],
}

impl RungKernel for TwoStates {
    type State = usize;

    fn potential(&self, state: &usize) -> f64 {
        self.phi[*state]
    }

    fn step<R: Rng + ?Sized>(&mut self, state: &mut usize, _rung: usize, beta: f64, rng: &mut R) {
        let w0 = (-beta * self.phi[0]).exp();
        let w1 = (-beta * self.phi[1]).exp();
        *state = usize::from(rng.random::<f64>() * (w0 + w1) >= w0);
    }
}

/// Batch-means standard error of the mean of `xs`.
fn batch_se(xs: &[f64], batches: usize) -> f64 {
    let size = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(size).map(|c| c.iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (var / means.len() as f64).sqrt()
}

/// Runs the toy chain and records the rung and state at every iteration.
fn toy_trace(phi: [f64; 2], betas: [f64; 2], log_prior: [f64; 2], iters: usize) -> (Vec<f64>, Vec<f64>) {
    let ladder = TemperatureLadder::new(betas.to_vec()).unwrap();
    let mut kernel = TwoStates { phi };
    let mut state_rng = stream_rng(41, 0);
    let mut rung_rng = stream_rng(41, 1);
    let mut state = 0;
    let mut rung = 0;
    let mut rung_trace = Vec::with_capacity(iters);
    let mut top_state_trace = Vec::new();
    for _ in 0..iters {
        let trace = simulated_tempering_with(&mut kernel, &ladder, &log_prior, state, rung, 1, &mut state_rng, &mut rung_rng);
        rung = usize::from(trace.occupancy[1] == 1);
        if let Some(s) = trace.top_states.last() {
            state = *s;
            top_state_trace.push(*s as f64);
        } else {
            // The state is redrawn every iteration, so the next step only needs
            // the rung; draw a state consistent with it.
            kernel.step(&mut state, rung, betas[rung], &mut state_rng);
        }
        rung_trace.push(rung as f64);
    }
    (rung_trace, top_state_trace)
}

#[test]
fn simulated_tempering_toy_matches_enumeration() {
    let phi = [0.0, 1.5];
    let betas = [0.3, 1.0];
    let log_prior = [0.0, 0.4];
    let (rungs, top_states) = toy_trace(phi, betas, log_prior, 200_000);
    let z = |b: f64| (-b * phi[0]).exp() + (-b * phi[1]).exp();
    let mass = [log_prior[0].exp() * z(betas[0]), log_prior[1].exp() * z(betas[1])];
    let top_exact = mass[1] / (mass[0] + mass[1]);
    let top_est = rungs.iter().sum::<f64>() / rungs.len() as f64;
    assert!((top_est - top_exact).abs() < 3.0 * batch_se(&rungs, 100), "top occupancy {top_est} vs {top_exact}");
    let s1_exact = (-phi[1]).exp() / z(1.0);
    let s1_est = top_states.iter().sum::<f64>() / top_states.len() as f64;
    assert!((s1_est - s1_exact).abs() < 3.0 * batch_se(&top_states, 100), "state mass {s1_est} vs {s1_exact}");
}

#[test]
fn two_rung_flat_target_splits_time_evenly() {
    let (rungs, _) = toy_trace([0.0, 0.0], [0.5, 1.0], [0.0, 0.0], 100_000);
    let top = rungs.iter().sum::<f64>() / rungs.len() as f64;
    assert!((top - 0.5).abs() < 3.0 * batch_se(&rungs, 100), "top occupancy {top}");
}

#[test]
fn swap_ratio_is_symmetric() {
    let mut rng = stream_rng(2, 0);
    for _ in 0..100 {
        let (b0, b1): (f64, f64) = (rng.random(), rng.random());
        let (p0, p1) = (rng.random_range(-5.0..20.0), rng.random_range(-5.0..20.0));
        let a = swap_log_ratio(b0, p0, b1, p1).min(0.0).exp();
        let b = swap_log_ratio(b1, p1, b0, p0).min(0.0).exp();
        assert!((a - b).abs() <= 1e-12);
        assert_eq!(swap_log_ratio(b0, p0, b1, p0), 0.0);
    }
}

#[test]
fn ais_recovers_gaussian_mean_and_normalizer() {
    let target = GaussianTarget::new(vec![3.0], 1.0);
    let base = GaussianInstrumental::standard(1);
    let ladder = TemperatureLadder::uniform(100, 0.0).unwrap();
    let kernel = HmcConfig { step_size: 0.5, num_leapfrog: 5, use_nuts: false, ..HmcConfig::default() };
    let run = annealed_importance_sampling(&target, &base, &ladder, &kernel, 1000, 17).unwrap();
    assert_eq!(run.excluded, 0);
    let w = run.samples.normalized_weights().unwrap();
    let xs: Vec<f64> = (0..w.len()).map(|k| run.samples.draw(0, k)[0]).collect();
    let mean: f64 = w.iter().zip(&xs).map(|(w, x)| w * x).sum();
    let se = w.iter().zip(&xs).map(|(w, x)| w * w * (x - mean).powi(2)).sum::<f64>().sqrt();
    assert!((mean - 3.0).abs() < 3.0 * se, "mean {mean} se {se}");
    // The target potential is normalized, so Z = 1.
    assert!((run.log_z.exp() - 1.0).abs() < 0.05, "Z {}", run.log_z.exp());
}

#[test]
fn parallel_tempering_on_separated_mixture() {
    let target = build_mixture_target(MixtureSpec::scenario_a()).unwrap();
    let kernel = HmcConfig { adapt_steps: 5000, seed: 6, ..HmcConfig::default() };
    let run = parallel_tempering(&target, &TemperatureLadder::default_parallel(), &kernel, &[2.0, 2.0], 50_000, 1).unwrap();
    let (mean, _) = run.samples.weighted_moments().unwrap();
    assert!((mean[0] - 4.478).abs() < 3.0 * 0.170, "E[X1] {}", mean[0]);
    assert!(run.swap_acceptance.iter().all(|a| *a > 0.0));
}

#[test]
fn simulated_tempering_on_boltzmann_has_finite_rmse() {
    let relax = generate_relaxation(1, 10, 6.0, 2.0).unwrap();
    let exact = enumerate_exact(&relax).unwrap();
    let target = relaxation_target(&relax);
    let kernel = HmcConfig { adapt_steps: 1000, seed: 3, ..HmcConfig::default() };
    let run = simulated_tempering(&target, &TemperatureLadder::default_simulated(), None, &kernel, &[0.0; 9], 20_000)
        .unwrap();
    let (mean, _) = run.samples.weighted_moments().unwrap();
    let rmse = compute_rmse(&[mean], &exact.mean_x).unwrap();
    assert!(rmse.value.is_finite(), "rmse {:?}", rmse);
    assert_eq!(run.occupancy.iter().sum::<usize>(), 20_000);
}
