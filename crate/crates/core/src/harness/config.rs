use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::TemperatureLadder;
use crate::error::{Error, Result};
use crate::hmc::HmcConfig;
use crate::targets::SyntheticDesign;

/// Which density to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Gaussian mixture from a built-in scenario (`scenario-a`, `scenario-b`) or a JSON file.
    Mixture {
        #[serde(default)]
        scenario: Option<String>,
        #[serde(default)]
        path: Option<PathBuf>,
    },
    /// Equal-weight pair at `∓1` with standard deviations 0.1 and 0.02.
    Bimodal,
    Gaussian { mean: Vec<f64>, variance: f64 },
    Banana {
        #[serde(default = "default_banana_b")]
        b: f64,
        #[serde(default = "default_banana_nu")]
        nu: f64,
    },
    Flower {
        #[serde(default = "default_flower_radius")]
        radius: f64,
        #[serde(default = "default_flower_amplitude")]
        amplitude: f64,
        #[serde(default = "default_flower_frequency")]
        frequency: f64,
        #[serde(default = "default_flower_sigma")]
        sigma: f64,
    },
    /// Boltzmann machine relaxation, generated from a seed or loaded from JSON.
    Boltzmann {
        #[serde(default = "default_d_b")]
        d_b: usize,
        #[serde(default = "default_instance_seed")]
        seed: u64,
        #[serde(default = "default_lambda1")]
        lambda1: f64,
        #[serde(default = "default_lambda2")]
        lambda2: f64,
        #[serde(default)]
        path: Option<PathBuf>,
    },
    /// Horseshoe logistic regression on a JSON dataset or a synthetic design.
    Horseshoe {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        design: Option<SyntheticDesign>,
        #[serde(default = "default_slab_scale")]
        slab_scale: f64,
    },
}

fn default_banana_b() -> f64 {
    crate::targets::BananaTarget::DEFAULT_B
}
fn default_banana_nu() -> f64 {
    crate::targets::BananaTarget::DEFAULT_NU
}
fn default_flower_radius() -> f64 {
    10.0
}
fn default_flower_amplitude() -> f64 {
    6.0
}
fn default_flower_frequency() -> f64 {
    6.0
}
fn default_flower_sigma() -> f64 {
    1.0
}
fn default_d_b() -> usize {
    10
}
fn default_instance_seed() -> u64 {
    1
}
fn default_lambda1() -> f64 {
    6.0
}
fn default_lambda2() -> f64 {
    2.0
}
fn default_slab_scale() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hmc,
    PeHmc,
    Pt,
    St,
    Ais,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Hmc => "hmc",
            Method::PeHmc => "pe-hmc",
            Method::Pt => "pt",
            Method::St => "st",
            Method::Ais => "ais",
        }
    }
}

/// Density over the inverse temperature of the tempered instrumental.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TemperatureSpec {
    /// `∝ 1`.
    #[default]
    Flat,
    /// `∝ β^exponent`.
    Power { exponent: f64 },
}

/// Instrumental distribution of the pseudo-extended sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstrumentalSpec {
    /// `q(x, β) ∝ γ(x)^β g(β)` with temperatures sampled jointly.
    Tempered {
        #[serde(default)]
        pi_beta: TemperatureSpec,
        #[serde(default)]
        g: TemperatureSpec,
    },
    /// Fixed isotropic Gaussian; `mean` defaults to the origin.
    Gaussian {
        #[serde(default)]
        mean: Option<Vec<f64>>,
        variance: f64,
    },
}

impl Default for InstrumentalSpec {
    fn default() -> Self {
        InstrumentalSpec::Tempered { pi_beta: TemperatureSpec::Flat, g: TemperatureSpec::Flat }
    }
}

/// Starting point of every chain or pseudo-sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitSpec {
    /// Target-specific: uniform over the bounding box of the mixture means,
    /// otherwise uniform on `[-2, 2]^d`.
    #[default]
    Auto,
    Origin,
    Point { value: Vec<f64> },
    Uniform { low: f64, high: f64 },
}

/// A single pseudo-sample count or a sweep over several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PseudoCount {
    One(usize),
    Sweep(Vec<usize>),
}

impl Default for PseudoCount {
    fn default() -> Self {
        PseudoCount::One(1)
    }
}

/// Ladder by explicit values or by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LadderSpec {
    Explicit(TemperatureLadder),
    Built(LadderRecipe),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LadderRecipe {
    Uniform { len: usize, start: f64 },
    Geometric { len: usize, start: f64 },
}

impl LadderSpec {
    pub fn build(&self) -> Result<TemperatureLadder> {
        match self {
            LadderSpec::Explicit(l) => Ok(l.clone()),
            LadderSpec::Built(LadderRecipe::Uniform { len, start }) => TemperatureLadder::uniform(*len, *start),
            LadderSpec::Built(LadderRecipe::Geometric { len, start }) => TemperatureLadder::geometric(*len, *start),
        }
    }
}

fn default_replications() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_swap_every() -> usize {
    1
}
fn default_particles() -> usize {
    1000
}
fn default_radius() -> f64 {
    super::diagnostics::DEFAULT_RADIUS_SIGMAS
}
fn default_threshold() -> f64 {
    super::diagnostics::DEFAULT_COVERAGE_THRESHOLD
}

/// One experiment: a target, a method and a replication plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    pub method: Method,
    /// `N`; a list expands into one experiment per entry.
    #[serde(default)]
    pub n_pseudo: PseudoCount,
    /// Recorded iterations per replication (after warmup).
    #[serde(default)]
    pub iters: usize,
    /// Warmup iterations; half of `iters` when absent.
    #[serde(default)]
    pub warmup: Option<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Kernel settings; `adapt_steps` and `seed` are set by the harness.
    #[serde(default)]
    pub sampler: HmcConfig,
    #[serde(default)]
    pub instrumental: InstrumentalSpec,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub ladder: Option<LadderSpec>,
    #[serde(default = "default_swap_every")]
    pub swap_every: usize,
    /// AIS particle count.
    #[serde(default = "default_particles")]
    pub n_particles: usize,
    /// AIS base: isotropic Gaussian; standard normal by default.
    #[serde(default)]
    pub base_variance: Option<f64>,
    #[serde(default)]
    pub base_mean: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub write_samples: bool,
    #[serde(default = "default_radius")]
    pub radius_sigmas: f64,
    #[serde(default = "default_threshold")]
    pub coverage_threshold: f64,
}

impl ExperimentConfig {
    pub fn new(target: TargetSpec, method: Method) -> Self {
        Self {
            target,
            method,
            n_pseudo: PseudoCount::One(1),
            iters: 0,
            warmup: None,
            replications: 1,
            seed: 0,
            output_dir: None,
            sampler: HmcConfig::default(),
            instrumental: InstrumentalSpec::default(),
            init: InitSpec::Auto,
            ladder: None,
            swap_every: 1,
            n_particles: default_particles(),
            base_variance: None,
            base_mean: None,
            write_samples: true,
            radius_sigmas: default_radius(),
            coverage_threshold: default_threshold(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative data paths are resolved against its directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_json_str(&text)?;
        if let Some(dir) = path.parent() {
            config.resolve_paths(dir);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(inner) = p.as_mut() {
                if inner.is_relative() {
                    *inner = dir.join(&*inner);
                }
            }
        };
        match &mut self.target {
            TargetSpec::Mixture { path, .. } | TargetSpec::Boltzmann { path, .. } | TargetSpec::Horseshoe { path, .. } => {
                fix(path)
            }
            _ => {}
        }
    }

    pub fn warmup_iters(&self) -> usize {
        self.warmup.unwrap_or(self.iters / 2)
    }

    /// The single pseudo-sample count of an expanded config.
    pub fn num_pseudo(&self) -> Result<usize> {
        match &self.n_pseudo {
            PseudoCount::One(n) => Ok(*n),
            PseudoCount::Sweep(list) if list.len() == 1 => Ok(list[0]),
            PseudoCount::Sweep(_) => Err(Error::Config("expand the N sweep before running".into())),
        }
    }

    /// One config per entry of an `n_pseudo` list.
    pub fn expand(&self) -> Vec<ExperimentConfig> {
        match &self.n_pseudo {
            PseudoCount::One(_) => vec![self.clone()],
            PseudoCount::Sweep(list) => list
                .iter()
                .map(|n| ExperimentConfig { n_pseudo: PseudoCount::One(*n), ..self.clone() })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if let PseudoCount::Sweep(list) = &self.n_pseudo {
            if list.is_empty() {
                return Err(Error::Config("n_pseudo sweep is empty".into()));
            }
        }
        let counts = match &self.n_pseudo {
            PseudoCount::One(n) => vec![*n],
            PseudoCount::Sweep(list) => list.clone(),
        };
        if self.method == Method::PeHmc && counts.contains(&0) {
            return Err(Error::Config("pe-hmc needs N >= 1".into()));
        }
        if self.method == Method::Ais && self.n_particles == 0 {
            return Err(Error::Config("ais needs at least one particle".into()));
        }
        if let TargetSpec::Mixture { scenario, path } = &self.target {
            if scenario.is_some() == path.is_some() {
                return Err(Error::Config("mixture target needs exactly one of scenario or path".into()));
            }
        }
        if let TargetSpec::Horseshoe { path: Some(_), design: Some(_), .. } = &self.target {
            return Err(Error::Config("horseshoe target takes a path or a design, not both".into()));
        }
        if let Some(ladder) = &self.ladder {
            ladder.build()?;
        }
        if !(self.radius_sigmas > 0.0) {
            return Err(Error::Config("radius_sigmas must be positive".into()));
        }
        if matches!(self.base_variance, Some(v) if !(v > 0.0)) {
            return Err(Error::Config("base_variance must be positive".into()));
        }
        if let InstrumentalSpec::Gaussian { variance, .. } = &self.instrumental {
            if !(*variance > 0.0) {
                return Err(Error::Config("instrumental variance must be positive".into()));
            }
        }
        let sampler = HmcConfig { adapt_steps: 0, ..self.sampler.clone() };
        sampler.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_sweep_with_defaults() {
        let text = r#"{
            "target": {"kind": "mixture", "scenario": "scenario-a"},
            "method": "pe-hmc",
            "n_pseudo": [2, 5],
            "iters": 100,
            "replications": 2,
            "seed": 3,
            "sampler": {"max_tree_depth": 8}
        }"#;
        let config = ExperimentConfig::from_json_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.warmup_iters(), 50);
        assert_eq!(config.sampler.max_tree_depth, 8);
        assert!(config.sampler.use_nuts);
        let expanded = config.expand();
        assert_eq!(expanded.len(), 2);
        assert_eq!(expanded[1].num_pseudo().unwrap(), 5);
        assert_eq!(config.instrumental, InstrumentalSpec::default());
    }

    #[test]
    fn unknown_kinds_fail_before_compute() {
        assert!(ExperimentConfig::from_json_str(r#"{"target": {"kind": "torus"}, "method": "hmc"}"#).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"target": {"kind": "bimodal"}, "method": "mala"}"#).is_err());
    }

    #[test]
    fn zero_pseudo_samples_are_rejected() {
        let mut config = ExperimentConfig::new(TargetSpec::Bimodal, Method::PeHmc);
        config.n_pseudo = PseudoCount::One(0);
        assert!(config.validate().is_err());
    }

    #[test]
    fn ladders_parse_both_ways() {
        let explicit: LadderSpec = serde_json::from_str("[0.1, 0.5, 1.0]").unwrap();
        assert_eq!(explicit.build().unwrap().len(), 3);
        let built: LadderSpec = serde_json::from_str(r#"{"kind": "geometric", "len": 4, "start": 0.01}"#).unwrap();
        assert_eq!(built.build().unwrap().len(), 4);
    }
}
