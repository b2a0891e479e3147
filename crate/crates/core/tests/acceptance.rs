//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.
//!
//! Pass criterion numbers as arguments to run a subset:
//! `cargo test --test acceptance -- 1 4 10`.

use std::time::Instant;

use pseudoext_core::boltzmann::{enumerate_exact, exact_sampler, generate_relaxation};
use pseudoext_core::checks::{
    energy_error_ratio, enumerated_estimator_bias, gradient_suite, leapfrog_jacobian_determinant,
    leapfrog_reversibility_error,
};
use pseudoext_core::harness::{
    run_experiment, ExperimentConfig, ExperimentRun, InitSpec, InstrumentalSpec, Method, PseudoCount, TargetSpec,
};
use pseudoext_core::hmc::{posterior, HmcConfig};
use pseudoext_core::rng::stream_rng;
use pseudoext_core::targets::{build_banana_target, build_mixture_target, GaussianTarget, MixtureSpec};
use rand::Rng;
use rand_distr::StandardNormal;

const SCENARIO_A_E1: f64 = 4.478;
const SCENARIO_A_E1_TOL: f64 = 3.0 * 0.039;
const SCENARIO_A_E22: f64 = 33.920;
const SCENARIO_A_E22_TOL: f64 = 3.0 * 0.437;
const SCENARIO_B_E1: f64 = 4.688;
const SCENARIO_B_E1_TOL: f64 = 3.0 * 0.015;
/// Of 90 independent 3-SE comparisons a correct sampler exceeds 3 SE at
/// least twice with probability about 2.5%.
const MAX_3SE_EXCEEDANCES: usize = 1;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn scenario(name: &str) -> TargetSpec {
    TargetSpec::Mixture { scenario: Some(name.into()), path: None }
}

fn run(config: &ExperimentConfig) -> ExperimentRun {
    run_experiment(config).unwrap_or_else(|e| panic!("experiment failed: {e}"))
}

fn estimator_exactness() -> Verdict {
    let mut rng = stream_rng(101, 0);
    let potentials: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
    let deltas: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut worst = 0f64;
    for _ in 0..10 {
        let f: Vec<f64> = (0..5).map(|_| rng.random_range(-10.0..10.0)).collect();
        worst = worst.max(enumerated_estimator_bias(&potentials, &deltas, &f, 2).abs());
    }
    verdict(worst <= 1e-10, format!("max |bias| over 10 f = {worst:.2e} (<= 1e-10)"))
}

fn gradients() -> Verdict {
    let outcomes = gradient_suite(50, 202);
    let worst = outcomes.iter().map(|o| o.value).fold(0.0, f64::max);
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    verdict(
        failed.is_empty(),
        format!("{} densities, max rel err {worst:.2e} (<= 1e-5); failing: {failed:?}", outcomes.len()),
    )
}

fn leapfrog_contracts() -> Verdict {
    let mixture = posterior(build_mixture_target(MixtureSpec::scenario_a()).unwrap());
    let banana = posterior(build_banana_target(0.1, 100.0).unwrap());
    let mut rng = stream_rng(303, 0);
    let mut reversibility = 0f64;
    let mut volume = 0f64;
    for _ in 0..20 {
        let y = [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)];
        let rho: [f64; 2] = [rng.sample(StandardNormal), rng.sample(StandardNormal)];
        reversibility = reversibility
            .max(leapfrog_reversibility_error(&mixture, &y, &rho, 0.02, 50))
            .max(leapfrog_reversibility_error(&banana, &y, &rho, 0.05, 50));
        volume = volume
            .max((leapfrog_jacobian_determinant(&mixture, &y, &rho, 0.02) - 1.0).abs())
            .max((leapfrog_jacobian_determinant(&banana, &y, &rho, 0.05) - 1.0).abs());
    }
    let gaussian = posterior(GaussianTarget::standard(1));
    let ratio = energy_error_ratio(&gaussian, &[1.0], &[0.5], 0.1, 10);
    verdict(
        reversibility <= 1e-10 && volume <= 1e-6 && (3.0..=5.0).contains(&ratio),
        format!("reversibility {reversibility:.2e} (<= 1e-10), |det J - 1| {volume:.2e} (<= 1e-6), dH ratio {ratio:.3} (in [3, 5])"),
    )
}

fn bimodal() -> Verdict {
    let mut hmc = ExperimentConfig::new(TargetSpec::Bimodal, Method::Hmc);
    hmc.iters = 10_000;
    hmc.warmup = Some(5_000);
    hmc.seed = 404;
    hmc.init = InitSpec::Point { value: vec![-1.0] };
    hmc.write_samples = false;
    let hmc_run = run(&hmc);
    let other = hmc_run.samples[0].weighted_expectation(|x| f64::from(u8::from(x[0] > 0.0))).unwrap();

    let mut pe = hmc.clone();
    pe.method = Method::PeHmc;
    pe.n_pseudo = PseudoCount::One(2);
    pe.iters = 50_000;
    pe.warmup = Some(20_000);
    pe.sampler = HmcConfig { target_accept: 0.9, ..HmcConfig::default() };
    pe.instrumental = InstrumentalSpec::Gaussian { mean: None, variance: 4.0 };
    let pe_run = run(&pe);
    let right = pe_run.samples[0].weighted_expectation(|x| f64::from(u8::from(x[0] > 0.0))).unwrap();
    verdict(
        other < 0.01 && (right - 0.5).abs() <= 0.1,
        format!("HMC mass in unvisited mode {other:.4} (< 0.01); PE N=2 split {:.3}/{right:.3} (oracle 0.5/0.5, tol 0.1)", 1.0 - right),
    )
}

fn scenario_a_config(method: Method) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(scenario("scenario-a"), method);
    config.n_pseudo = PseudoCount::One(5);
    config.iters = 50_000;
    config.warmup = Some(25_000);
    config.replications = 5;
    config.seed = 505;
    config.write_samples = false;
    config
}

fn scenario_a(report_json: &mut Option<String>) -> Verdict {
    let pe = run(&scenario_a_config(Method::PeHmc));
    let hmc = run(&scenario_a_config(Method::Hmc));
    *report_json = Some(pe.report.to_json().unwrap());
    let e1 = pe.report.aggregate.mean[0];
    let e22 = pe.report.aggregate.second_moment[1];
    let covered = |r: &ExperimentRun| -> Vec<usize> {
        r.report.runs.iter().map(|x| x.mode_coverage.as_ref().map_or(0, |c| c.covered)).collect()
    };
    let (pe_cov, hmc_cov) = (covered(&pe), covered(&hmc));
    verdict(
        (e1 - SCENARIO_A_E1).abs() <= SCENARIO_A_E1_TOL
            && (e22 - SCENARIO_A_E22).abs() <= SCENARIO_A_E22_TOL
            && pe_cov.iter().all(|c| *c == 20)
            && hmc_cov.iter().all(|c| *c < 20),
        format!(
            "E[X1] {e1:.3} (4.478 +- {SCENARIO_A_E1_TOL:.3}), E[X2^2] {e22:.3} (33.920 +- {SCENARIO_A_E22_TOL:.3}), \
             modes covered PE {pe_cov:?} HMC {hmc_cov:?}"
        ),
    )
}

fn scenario_b() -> Verdict {
    let mut config = ExperimentConfig::new(scenario("scenario-b"), Method::PeHmc);
    config.n_pseudo = PseudoCount::One(5);
    config.iters = 50_000;
    config.warmup = Some(25_000);
    config.replications = 3;
    config.seed = 606;
    config.write_samples = false;
    let pe = run(&config);
    let e1 = pe.report.aggregate.mean[0];
    verdict(
        (e1 - SCENARIO_B_E1).abs() <= SCENARIO_B_E1_TOL,
        format!("E[X1] {e1:.3} over 3 replications (4.688 +- {SCENARIO_B_E1_TOL:.3})"),
    )
}

fn boltzmann() -> Verdict {
    let mut pe_sq = 0.0;
    let mut hmc_sq = 0.0;
    let mut max_z = 0f64;
    let mut exceed = 0;
    let mut tested = 0;
    for seed in 1..=10u64 {
        let target = TargetSpec::Boltzmann { d_b: 10, seed, lambda1: 6.0, lambda2: 2.0, path: None };
        let mut pe = ExperimentConfig::new(target, Method::PeHmc);
        pe.n_pseudo = PseudoCount::One(5);
        pe.iters = 20_000;
        pe.seed = 700 + seed;
        pe.write_samples = false;
        let mut hmc = pe.clone();
        hmc.method = Method::Hmc;
        pe_sq += run(&pe).report.rmse_first.unwrap().value.powi(2);
        hmc_sq += run(&hmc).report.rmse_first.unwrap().value.powi(2);

        let relax = generate_relaxation(seed, 10, 6.0, 2.0).unwrap();
        let exact = enumerate_exact(&relax).unwrap();
        let draws = exact_sampler(&relax, 400_000, 800 + seed).unwrap();
        let n = draws.len() as f64;
        for k in 0..exact.mean_x.len() {
            let m = draws.iter().map(|x| x[k]).sum::<f64>() / n;
            let se = ((exact.second_x[k][k] - exact.mean_x[k].powi(2)) / n).sqrt();
            let z = (m - exact.mean_x[k]).abs() / se;
            max_z = max_z.max(z);
            tested += 1;
            exceed += usize::from(z >= 3.0);
        }
    }
    let (pe_rmse, hmc_rmse) = ((pe_sq / 10.0).sqrt(), (hmc_sq / 10.0).sqrt());
    verdict(
        pe_rmse < hmc_rmse && exceed <= MAX_3SE_EXCEEDANCES,
        format!(
            "first-moment RMSE over 10 instances PE {pe_rmse:.3} vs HMC {hmc_rmse:.3}; exact sampler: \
             {exceed}/{tested} coordinates beyond 3 SE (<= {MAX_3SE_EXCEEDANCES}), max |z| {max_z:.2}"
        ),
    )
}

fn mse_cost_trend() -> Verdict {
    let mut products = Vec::new();
    for n in [2usize, 5, 10, 20] {
        let mut config = scenario_a_config(Method::PeHmc);
        config.n_pseudo = PseudoCount::One(n);
        config.iters = 10_000;
        config.warmup = Some(5_000);
        config.seed = 808;
        let r = run(&config);
        products.push((n, r.timing.mse_x_ct.unwrap()));
    }
    let best = products.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
    let listing: Vec<String> = products.iter().map(|(n, p)| format!("N={n}: {p:.3e}")).collect();
    verdict(best == 2 || best == 5, format!("MSE x CT {} ; minimum at N={best} (want 2 or 5)", listing.join(", ")))
}

fn flower() -> Verdict {
    let target = TargetSpec::Flower { radius: 10.0, amplitude: 6.0, frequency: 6.0, sigma: 1.0 };
    let mut pe = ExperimentConfig::new(target, Method::PeHmc);
    pe.n_pseudo = PseudoCount::One(5);
    pe.iters = 10_000;
    pe.seed = 909;
    pe.write_samples = false;
    let mut hmc = pe.clone();
    hmc.method = Method::Hmc;
    let masses = |r: &ExperimentRun| r.report.runs[0].petal_coverage.clone().unwrap().masses;
    let pe_masses = masses(&run(&pe));
    let hmc_masses = masses(&run(&hmc));
    let fmt = |m: &[f64]| m.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ");
    verdict(
        pe_masses.len() == 6 && pe_masses.iter().all(|m| *m >= 0.01),
        format!("PE petal masses [{}] (each >= 0.01); HMC [{}] (reported only)", fmt(&pe_masses), fmt(&hmc_masses)),
    )
}

fn ais() -> Verdict {
    let target = TargetSpec::Gaussian { mean: vec![1.0, -2.0], variance: 0.5 };
    let mut config = ExperimentConfig::new(target, Method::Ais);
    config.ladder = Some(serde_json::from_str(r#"{"kind": "uniform", "len": 100, "start": 0.0}"#).unwrap());
    config.n_particles = 1000;
    config.sampler = HmcConfig { step_size: 0.4, num_leapfrog: 5, use_nuts: false, ..HmcConfig::default() };
    config.seed = 1010;
    config.write_samples = false;
    let r = run(&config);
    // The Gaussian potential carries its own normalizer, so the closed form is Z = 1.
    let z = r.report.runs[0].log_z.unwrap().exp();
    verdict((z - 1.0).abs() <= 0.05, format!("Z estimate {z:.4} (closed form 1, tol 5%)"))
}

fn determinism(first: Option<String>) -> Verdict {
    let first = first.unwrap_or_else(|| run(&scenario_a_config(Method::PeHmc)).report.to_json().unwrap());
    let second = run(&scenario_a_config(Method::PeHmc)).report.to_json().unwrap();
    verdict(first.as_bytes() == second.as_bytes(), format!("report.json {} bytes, identical: {}", first.len(), first == second))
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| selected.is_empty() || selected.contains(&k);
    let names = [
        "weighted estimator exact on enumerable target",
        "gradients match finite differences",
        "leapfrog reversibility, volume, energy scaling",
        "bimodal: HMC stuck, PE recovers both modes",
        "scenario (a) moments and mode coverage",
        "scenario (b) first moment",
        "Boltzmann relaxation RMSE, PE vs HMC",
        "MSE x compute time minimized at small N",
        "flower petal coverage",
        "AIS normalizing constant",
        "byte-identical report on rerun",
    ];
    let mut scenario_a_report = None;
    let mut failures = 0;
    for (idx, name) in names.iter().enumerate() {
        let k = idx + 1;
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let v = match k {
            1 => estimator_exactness(),
            2 => gradients(),
            3 => leapfrog_contracts(),
            4 => bimodal(),
            5 => scenario_a(&mut scenario_a_report),
            6 => scenario_b(),
            7 => boltzmann(),
            8 => mse_cost_trend(),
            9 => flower(),
            10 => ais(),
            _ => determinism(scenario_a_report.take()),
        };
        if !v.passed {
            failures += 1;
        }
        println!(
            "criterion {k:>2} {} {name}: {} [{:.1} s]",
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
