//! Experiment harness: builds targets and samplers from a JSON config, runs
//! seeded replications and writes draws, a deterministic report and timings.

mod config;
mod diagnostics;

pub use config::{
    ExperimentConfig, InitSpec, InstrumentalSpec, LadderRecipe, LadderSpec, Method, PseudoCount, TargetSpec,
    TemperatureSpec,
};
pub use diagnostics::{
    compute_ess, compute_rmse, mode_coverage, petal_coverage, EssEstimate, ModeCoverage, Rmse,
    DEFAULT_COVERAGE_THRESHOLD, DEFAULT_PETAL_THRESHOLD, DEFAULT_RADIUS_SIGMAS,
};

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use log::info;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    annealed_importance_sampling, parallel_tempering, simulated_tempering, TemperatureLadder,
};
use crate::boltzmann::{enumerate_exact, generate_relaxation, relaxation_target, BoltzmannRelaxation};
use crate::error::{Error, Result};
use crate::extended::{
    FlatTemperature, GaussianInstrumental, PowerTemperature, TemperatureDensity, TemperedExtendedTarget,
    WeightedSampleSet, ExtendedTarget,
};
use crate::hmc::{posterior, run_chain, ChainResult, HmcConfig};
use crate::math::{mean, sigmoid, softmax_into, std_dev};
use crate::rng::{derive_seed, stream_rng};
use crate::targets::{
    build_banana_target, build_flower_target, build_horseshoe_target, build_mixture_target, FlowerTarget,
    GaussianTarget, HorseshoeModel, MixtureSpec, SharedTarget,
};

/// Stream used to draw initial states, distinct from every chain stream.
const INIT_STREAM: u64 = u64::MAX - 1;

const PUBLISHED_REFERENCE: &str = include_str!("../../data/published_reference.json");

/// Exact coordinate-wise moments of a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
}

/// A built target together with what the harness knows about it.
pub struct PreparedTarget {
    pub target: SharedTarget,
    pub truth: Option<Truth>,
    pub mixture: Option<MixtureSpec>,
    pub flower: Option<FlowerTarget>,
    /// Published reference rows for the built-in mixture scenarios.
    pub reference: Option<serde_json::Value>,
    init_box: (Vec<f64>, Vec<f64>),
}

fn mixture_prepared(spec: MixtureSpec, reference_key: Option<&str>) -> Result<PreparedTarget> {
    let (mean, second_moment) = spec.moments();
    let d = spec.dim();
    let mut low = vec![f64::INFINITY; d];
    let mut high = vec![f64::NEG_INFINITY; d];
    for m in &spec.means {
        for i in 0..d {
            low[i] = low[i].min(m[i]);
            high[i] = high[i].max(m[i]);
        }
    }
    let reference = match reference_key {
        Some(key) => {
            let table: serde_json::Value = serde_json::from_str(PUBLISHED_REFERENCE)?;
            Some(serde_json::json!({ "columns": table["columns"], "rows": table[key] }))
        }
        None => None,
    };
    Ok(PreparedTarget {
        target: Arc::new(build_mixture_target(spec.clone())?),
        truth: Some(Truth { mean, second_moment }),
        mixture: Some(spec),
        flower: None,
        reference,
        init_box: (low, high),
    })
}

fn cube(d: usize, half_width: f64) -> (Vec<f64>, Vec<f64>) {
    (vec![-half_width; d], vec![half_width; d])
}

/// Builds the target described by `spec`, with exact moments when available.
pub fn prepare_target(spec: &TargetSpec) -> Result<PreparedTarget> {
    let plain = |target: SharedTarget, truth: Option<Truth>| {
        let d = target.dim();
        PreparedTarget { target, truth, mixture: None, flower: None, reference: None, init_box: cube(d, 2.0) }
    };
    match spec {
        TargetSpec::Mixture { scenario: Some(name), path: None } => {
            let key = match name.as_str() {
                "scenario-a" => "scenario_a",
                "scenario-b" => "scenario_b",
                other => return Err(Error::Config(format!("unknown mixture scenario {other:?}"))),
            };
            mixture_prepared(MixtureSpec::load(name)?, Some(key))
        }
        TargetSpec::Mixture { scenario: None, path: Some(path) } => mixture_prepared(MixtureSpec::from_path(path)?, None),
        TargetSpec::Mixture { .. } => Err(Error::Config("mixture target needs exactly one of scenario or path".into())),
        TargetSpec::Bimodal => mixture_prepared(MixtureSpec::bimodal(), None),
        TargetSpec::Gaussian { mean, variance } => {
            if !(*variance > 0.0) {
                return Err(Error::Config("gaussian variance must be positive".into()));
            }
            let second = mean.iter().map(|m| m * m + variance).collect();
            let truth = Truth { mean: mean.clone(), second_moment: second };
            Ok(plain(Arc::new(GaussianTarget::new(mean.clone(), *variance)), Some(truth)))
        }
        TargetSpec::Banana { b, nu } => {
            let target = build_banana_target(*b, *nu)?;
            let (mean, second_moment) = target.moments();
            Ok(plain(Arc::new(target), Some(Truth { mean, second_moment })))
        }
        TargetSpec::Flower { radius, amplitude, frequency, sigma } => {
            let flower = build_flower_target(*radius, *amplitude, *frequency, *sigma)?;
            let reach = radius + amplitude.abs();
            Ok(PreparedTarget {
                target: Arc::new(flower.clone()),
                truth: None,
                mixture: None,
                flower: Some(flower),
                reference: None,
                init_box: cube(2, reach),
            })
        }
        TargetSpec::Boltzmann { d_b, seed, lambda1, lambda2, path } => {
            let relax = match path {
                Some(p) => BoltzmannRelaxation::from_json(&std::fs::read_to_string(p)?)?,
                None => generate_relaxation(*seed, *d_b, *lambda1, *lambda2)?,
            };
            let truth = enumerate_exact(&relax)
                .ok()
                .map(|exact| Truth { second_moment: exact.second_x_diagonal(), mean: exact.mean_x });
            Ok(plain(Arc::new(relaxation_target(&relax)), truth))
        }
        TargetSpec::Horseshoe { path, design, slab_scale } => {
            let model = match (path, design) {
                (Some(p), None) => {
                    let text = std::fs::read_to_string(p)?;
                    let model: HorseshoeModel = serde_json::from_str(&text)?;
                    model
                }
                (None, design) => design.clone().unwrap_or_default().generate(*slab_scale)?.0,
                (Some(_), Some(_)) => {
                    return Err(Error::Config("horseshoe target takes a path or a design, not both".into()))
                }
            };
            Ok(plain(Arc::new(build_horseshoe_target(model)?), None))
        }
    }
}

/// Per-replication estimates and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: usize,
    pub seed: u64,
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub acceptance_rate: f64,
    pub divergences: usize,
    /// Leapfrog steps after warmup (gradient evaluations of the sampled density).
    pub leapfrog_steps: usize,
    /// Mean squared error of the first and second moments against the truth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squared_error: Option<f64>,
    /// Per-coordinate ESS of the row-wise weighted mean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ess: Option<Vec<EssEstimate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_coverage: Option<ModeCoverage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub petal_coverage: Option<ModeCoverage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_acceptance: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rung_acceptance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_rung_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub excluded_particles: Option<usize>,
}

/// Mean and standard deviation across replications, per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: Vec<f64>,
    pub mean_sd: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub second_moment_sd: Vec<f64>,
}

/// Deterministic summary of an experiment; identical configs give identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: String,
    pub target: String,
    pub n_pseudo: usize,
    pub iters: usize,
    pub warmup: usize,
    pub replications: usize,
    pub seed: u64,
    pub runs: Vec<ReplicationRecord>,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<Truth>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_first: Option<Rmse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse_second: Option<Rmse>,
    /// Replication average of `squared_error`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<serde_json::Value>,
    pub notes: Vec<String>,
}

/// Wall-clock measurements, kept apart from the report so the report stays reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    /// Sampling time of each replication, excluding target construction.
    pub sampling_seconds: Vec<f64>,
    pub mean_seconds: f64,
    /// `mse × mean_seconds`, when the truth is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_x_ct: Option<f64>,
}

/// Everything produced by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub timing: TimingReport,
    pub samples: Vec<WeightedSampleSet>,
}

struct Outcome {
    samples: WeightedSampleSet,
    record: ReplicationRecord,
    seconds: f64,
}

fn draw_init<R: Rng + ?Sized>(init: &InitSpec, prepared: &PreparedTarget, rng: &mut R) -> Result<Vec<f64>> {
    let d = prepared.target.dim();
    match init {
        InitSpec::Origin => Ok(vec![0.0; d]),
        InitSpec::Point { value } => {
            crate::error::check_dim(d, value.len())?;
            Ok(value.clone())
        }
        InitSpec::Uniform { low, high } => Ok((0..d).map(|_| low + (high - low) * rng.random::<f64>()).collect()),
        InitSpec::Auto => {
            let (low, high) = &prepared.init_box;
            Ok((0..d).map(|i| low[i] + (high[i] - low[i]) * rng.random::<f64>()).collect())
        }
    }
}

fn temperature_density(spec: &TemperatureSpec) -> Arc<dyn TemperatureDensity> {
    match spec {
        TemperatureSpec::Flat => Arc::new(FlatTemperature),
        TemperatureSpec::Power { exponent } => Arc::new(PowerTemperature { exponent: *exponent }),
    }
}

fn blank_record(index: usize, seed: u64) -> ReplicationRecord {
    ReplicationRecord {
        index,
        seed,
        mean: Vec::new(),
        second_moment: Vec::new(),
        acceptance_rate: f64::NAN,
        divergences: 0,
        leapfrog_steps: 0,
        squared_error: None,
        ess: None,
        mode_coverage: None,
        petal_coverage: None,
        mean_beta: None,
        swap_acceptance: None,
        rung_acceptance: None,
        top_rung_fraction: None,
        log_z: None,
        excluded_particles: None,
    }
}

fn chain_record(record: &mut ReplicationRecord, chain: &ChainResult) {
    record.acceptance_rate = chain.accept_rate;
    record.divergences = chain.divergence_count;
    record.leapfrog_steps = chain.total_steps;
}

fn run_replication(config: &ExperimentConfig, prepared: &PreparedTarget, n: usize, index: usize) -> Result<Outcome> {
    let seed = derive_seed(config.seed, index as u64);
    let target = &prepared.target;
    let d = target.dim();
    let sampler = HmcConfig { adapt_steps: config.warmup_iters(), seed, ..config.sampler.clone() };
    let mut init_rng = stream_rng(seed, INIT_STREAM);
    let mut record = blank_record(index, seed);
    let iters = config.iters;

    let start = Instant::now();
    let samples = match config.method {
        Method::Hmc => {
            let init = draw_init(&config.init, prepared, &mut init_rng)?;
            let chain = run_chain(&posterior(target), &init, iters, &sampler)?;
            chain_record(&mut record, &chain);
            let mut set = WeightedSampleSet::new("hmc", d, 1, seed);
            for state in chain.states().take(chain.len()) {
                set.push_row(state, &[0.0], None);
            }
            set.acceptance_rate = chain.accept_rate;
            set
        }
        Method::PeHmc => {
            let mut init = Vec::with_capacity(n * (d + 1));
            for _ in 0..n {
                init.extend(draw_init(&config.init, prepared, &mut init_rng)?);
            }
            let mut set = WeightedSampleSet::new("pe-hmc", d, n, seed);
            match &config.instrumental {
                InstrumentalSpec::Tempered { pi_beta, g } => {
                    let extended = TemperedExtendedTarget::with_temperature_densities(
                        target.clone(),
                        n,
                        temperature_density(pi_beta),
                        temperature_density(g),
                    )?;
                    init.extend(std::iter::repeat_n(0.0, n));
                    let chain = run_chain(&extended, &init, iters, &sampler)?;
                    chain_record(&mut record, &chain);
                    let mut beta_sum = 0.0;
                    for state in chain.states().take(chain.len()) {
                        let betas: Vec<f64> = state[n * d..].iter().map(|u| sigmoid(*u)).collect();
                        beta_sum += betas.iter().sum::<f64>();
                        set.push_row(&state[..n * d], &extended.log_weights(state), Some(&betas));
                    }
                    if !chain.is_empty() {
                        record.mean_beta = Some(beta_sum / (chain.len() * n) as f64);
                    }
                    set.acceptance_rate = chain.accept_rate;
                }
                InstrumentalSpec::Gaussian { mean, variance } => {
                    let mean = mean.clone().unwrap_or_else(|| vec![0.0; d]);
                    crate::error::check_dim(d, mean.len())?;
                    let extended = ExtendedTarget::new(target.clone(), GaussianInstrumental::new(mean, *variance), n)?;
                    let chain = run_chain(&extended, &init, iters, &sampler)?;
                    chain_record(&mut record, &chain);
                    for state in chain.states().take(chain.len()) {
                        set.push_row(state, &extended.log_weights(state), None);
                    }
                    set.acceptance_rate = chain.accept_rate;
                }
            }
            set
        }
        Method::Pt => {
            let init = draw_init(&config.init, prepared, &mut init_rng)?;
            let ladder = match &config.ladder {
                Some(spec) => spec.build()?,
                None => TemperatureLadder::default_parallel(),
            };
            let run = parallel_tempering(target, &ladder, &sampler, &init, iters, config.swap_every)?;
            record.acceptance_rate = run.samples.acceptance_rate;
            record.divergences = run.divergence_count;
            record.swap_acceptance = Some(run.swap_acceptance);
            run.samples
        }
        Method::St => {
            let init = draw_init(&config.init, prepared, &mut init_rng)?;
            let ladder = match &config.ladder {
                Some(spec) => spec.build()?,
                None => TemperatureLadder::default_simulated(),
            };
            let run = simulated_tempering(target, &ladder, None, &sampler, &init, iters)?;
            record.top_rung_fraction = Some(run.samples.acceptance_rate);
            record.rung_acceptance = Some(run.rung_acceptance);
            run.samples
        }
        Method::Ais => {
            let ladder = match &config.ladder {
                Some(spec) => spec.build()?,
                None => TemperatureLadder::default_annealing(),
            };
            let base = GaussianInstrumental::new(
                config.base_mean.clone().unwrap_or_else(|| vec![0.0; d]),
                config.base_variance.unwrap_or(1.0),
            );
            let kernel = HmcConfig { adapt_steps: 0, ..sampler };
            let run = annealed_importance_sampling(target, &base, &ladder, &kernel, config.n_particles, seed)?;
            record.log_z = Some(run.log_z);
            record.excluded_particles = Some(run.excluded);
            run.samples
        }
    };
    let seconds = start.elapsed().as_secs_f64();

    if samples.is_empty() {
        record.mean = vec![f64::NAN; d];
        record.second_moment = vec![f64::NAN; d];
    } else {
        let (m, s) = samples.weighted_moments()?;
        record.mean = m;
        record.second_moment = s;
        if let Some(spec) = &prepared.mixture {
            record.mode_coverage = Some(mode_coverage(&samples, spec, config.radius_sigmas, config.coverage_threshold)?);
        }
        if let Some(flower) = &prepared.flower {
            record.petal_coverage = Some(petal_coverage(&samples, flower, DEFAULT_PETAL_THRESHOLD)?);
        }
        if samples.rows() >= 10 && config.method != Method::Ais {
            record.ess = Some(row_mean_ess(&samples)?);
        }
    }
    if let Some(truth) = &prepared.truth {
        let errors: Vec<f64> = record
            .mean
            .iter()
            .zip(&truth.mean)
            .chain(record.second_moment.iter().zip(&truth.second_moment))
            .map(|(e, t)| (e - t) * (e - t))
            .collect();
        record.squared_error = Some(mean(&errors));
    }
    Ok(Outcome { samples, record, seconds })
}

/// ESS of each coordinate of the per-row weighted mean.
fn row_mean_ess(samples: &WeightedSampleSet) -> Result<Vec<EssEstimate>> {
    let (rows, n, d) = (samples.rows(), samples.num_pseudo, samples.dim);
    let mut series = vec![Vec::with_capacity(rows); d];
    let mut w = vec![0.0; n];
    for row in 0..rows {
        softmax_into(samples.row_log_weights(row), &mut w);
        for (k, s) in series.iter_mut().enumerate() {
            s.push((0..n).map(|i| w[i] * samples.draw(row, i)[k]).sum());
        }
    }
    series.iter().map(|s| compute_ess(s)).collect()
}

fn with_pool<T: Send>(job: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("PSEUDOEXT_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    match threads.filter(|t| *t > 0) {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        None => job(),
    }
}

/// Runs every replication of a single-`N` experiment.
///
/// Replication `r` uses the seed `derive_seed(config.seed, r)`. Replications
/// run concurrently (capped by `PSEUDOEXT_THREADS`); results are assembled
/// in replication order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let n = config.num_pseudo()?;
    let prepared = prepare_target(&config.target)?;
    info!(
        "running {} on {} (N = {n}, {} replications)",
        config.method.name(),
        prepared.target.label(),
        config.replications
    );
    let outcomes: Vec<Outcome> = with_pool(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(config, &prepared, n, r))
            .collect::<Result<Vec<_>>>()
    })?;

    let d = prepared.target.dim();
    let mut notes = Vec::new();
    let mut aggregate = Aggregate { mean: vec![], mean_sd: vec![], second_moment: vec![], second_moment_sd: vec![] };
    for k in 0..d {
        let firsts: Vec<f64> = outcomes.iter().map(|o| o.record.mean[k]).collect();
        let seconds: Vec<f64> = outcomes.iter().map(|o| o.record.second_moment[k]).collect();
        aggregate.mean.push(mean(&firsts));
        aggregate.mean_sd.push(std_dev(&firsts));
        aggregate.second_moment.push(mean(&seconds));
        aggregate.second_moment_sd.push(std_dev(&seconds));
    }
    if config.replications == 1 {
        notes.push("single replication: standard deviations are reported as 0".into());
    }
    if config.iters == 0 && config.method != Method::Ais {
        notes.push("no iterations requested; estimates are NaN".into());
    }
    if config.method == Method::Pt {
        let ladder = config.ladder.as_ref().map(|l| l.build()).transpose()?.unwrap_or_else(TemperatureLadder::default_parallel);
        notes.push(format!("parallel tempering ladder: {:?}", ladder.betas()));
    }
    if matches!(config.method, Method::Pt | Method::St) {
        notes.push(format!("lowest inverse temperature clamped at {}", crate::baselines::MIN_TEMPERING_BETA));
    }

    let (rmse_first, rmse_second, mse) = match &prepared.truth {
        Some(truth) => {
            let firsts: Vec<Vec<f64>> = outcomes.iter().map(|o| o.record.mean.clone()).collect();
            let seconds: Vec<Vec<f64>> = outcomes.iter().map(|o| o.record.second_moment.clone()).collect();
            let errors: Vec<f64> = outcomes.iter().filter_map(|o| o.record.squared_error).collect();
            (
                Some(compute_rmse(&firsts, &truth.mean)?),
                Some(compute_rmse(&seconds, &truth.second_moment)?),
                Some(mean(&errors)),
            )
        }
        None => (None, None, None),
    };

    let sampling_seconds: Vec<f64> = outcomes.iter().map(|o| o.seconds).collect();
    let mean_seconds = mean(&sampling_seconds);
    let timing = TimingReport { mse_x_ct: mse.map(|m| m * mean_seconds), sampling_seconds, mean_seconds };

    let mut samples = Vec::with_capacity(outcomes.len());
    let mut runs = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        samples.push(o.samples);
        runs.push(o.record);
    }
    let report = ExperimentReport {
        method: config.method.name().into(),
        target: prepared.target.label().into(),
        n_pseudo: if config.method == Method::PeHmc { n } else { 1 },
        iters: config.iters,
        warmup: config.warmup_iters(),
        replications: config.replications,
        seed: config.seed,
        runs,
        aggregate,
        truth: prepared.truth.clone(),
        rmse_first,
        rmse_second,
        mse,
        reference: prepared.reference.clone(),
        notes,
    };
    Ok(ExperimentRun { report, timing, samples })
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Writes `report.json`, `timing.json` and, if requested, `samples_<rep>.csv`.
pub fn write_outputs(run: &ExperimentRun, dir: impl AsRef<Path>, write_samples: bool) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    if write_samples {
        for (r, set) in run.samples.iter().enumerate() {
            set.write_csv(dir.join(format!("samples_{r}.csv")))?;
        }
    }
    std::fs::write(dir.join("report.json"), run.report.to_json()? + "\n")?;
    std::fs::write(dir.join("timing.json"), serde_json::to_string_pretty(&run.timing)? + "\n")?;
    Ok(())
}

/// Expands an `N` sweep, runs each experiment and writes its outputs to
/// `out` (or `out/n_<N>` for sweeps).
pub fn run_and_write(config: &ExperimentConfig, out: impl AsRef<Path>) -> Result<Vec<ExperimentRun>> {
    config.validate()?;
    let out = out.as_ref();
    let sweep = matches!(config.n_pseudo, PseudoCount::Sweep(_));
    let mut runs = Vec::new();
    for single in config.expand() {
        let run = run_experiment(&single)?;
        let dir = if sweep { out.join(format!("n_{}", single.num_pseudo()?)) } else { out.to_path_buf() };
        write_outputs(&run, &dir, single.write_samples)?;
        runs.push(run);
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_give_nan_estimates() {
        let mut config = ExperimentConfig::new(TargetSpec::Bimodal, Method::Hmc);
        config.iters = 0;
        let run = run_experiment(&config).unwrap();
        assert_eq!(run.report.runs.len(), 1);
        assert!(run.report.runs[0].mean[0].is_nan());
        assert!(run.report.aggregate.mean[0].is_nan());
        assert!(run.samples[0].is_empty());
    }

    #[test]
    fn unknown_scenario_is_a_config_error() {
        let config = ExperimentConfig::new(
            TargetSpec::Mixture { scenario: Some("scenario-z".into()), path: None },
            Method::Hmc,
        );
        assert!(matches!(run_experiment(&config), Err(Error::Config(_))));
    }
}
