use super::TargetDensity;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

const SCENARIO_A: &str = include_str!("../../data/mixture_scenario_a.json");
const SCENARIO_B: &str = include_str!("../../data/mixture_scenario_b.json");

/// Reference moments shipped alongside a mixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTruth {
    pub mean: Vec<f64>,
    pub second_moment: Vec<f64>,
}

/// Isotropic Gaussian mixture `Σ_j w_j N(μ_j, σ²_j I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub means: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub variances: Vec<f64>,
    /// Published moments; checked against the analytic moments at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<MixtureTruth>,
}

impl MixtureSpec {
    pub fn new(means: Vec<Vec<f64>>, weights: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        let spec = Self { means, weights, variances, truth: None };
        spec.validate()?;
        Ok(spec)
    }

    /// Well-separated scenario: 20 equal-weight components with variance 1/100.
    pub fn scenario_a() -> Self {
        Self::from_json_str(SCENARIO_A).expect("embedded scenario (a) is valid")
    }

    /// Unequal scenario: weights and scales tied to the distance from (5, 5).
    pub fn scenario_b() -> Self {
        Self::from_json_str(SCENARIO_B).expect("embedded scenario (b) is valid")
    }

    /// One-dimensional pair with standard deviations 0.1 and 0.02 at `∓1`, equal weights.
    pub fn bimodal() -> Self {
        Self::new(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5], vec![0.01, 0.0004]).expect("valid bimodal spec")
    }

    /// Resolves the names `scenario-a` / `scenario-b` to the embedded specs,
    /// anything else is read as a JSON file path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        match name_or_path {
            "scenario-a" => Ok(Self::scenario_a()),
            "scenario-b" => Ok(Self::scenario_b()),
            path => Self::from_path(path),
        }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Parses and validates a spec. When the file carries `truth`, the analytic
    /// moments must agree with it to three decimal places.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: MixtureSpec = serde_json::from_str(text)?;
        spec.validate()?;
        if let Some(truth) = &spec.truth {
            let (mean, second) = spec.moments();
            let pairs = mean
                .iter()
                .zip(&truth.mean)
                .chain(second.iter().zip(&truth.second_moment));
            if truth.mean.len() != spec.dim() || truth.second_moment.len() != spec.dim() {
                return Err(Error::InvalidSpec("truth moments have the wrong dimension".into()));
            }
            for (computed, published) in pairs {
                // three-decimal agreement, with slack for the decimal rounding itself
                if (computed - published).abs() > 5e-4 + 1e-9 {
                    return Err(Error::InvalidSpec(format!(
                        "analytic moment {computed:.6} disagrees with published {published}"
                    )));
                }
            }
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn validate(&self) -> Result<()> {
        if self.means.is_empty() {
            return Err(Error::InvalidSpec("mixture needs at least one component".into()));
        }
        let k = self.means.len();
        if self.weights.len() != k || self.variances.len() != k {
            return Err(Error::InvalidSpec(format!(
                "{} means, {} weights, {} variances",
                k,
                self.weights.len(),
                self.variances.len()
            )));
        }
        let dim = self.dim();
        if dim == 0 || self.means.iter().any(|m| m.len() != dim) {
            return Err(Error::InvalidSpec("component means must share a positive dimension".into()));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSpec("weights must be non-negative".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("weights sum to {total}, not 1")));
        }
        if self.variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidSpec("variances must be strictly positive".into()));
        }
        Ok(())
    }

    /// Analytic `(E[X], E[X²])`, coordinate-wise.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut mean = vec![0.0; d];
        let mut second = vec![0.0; d];
        for ((mu, w), v) in self.means.iter().zip(&self.weights).zip(&self.variances) {
            for i in 0..d {
                mean[i] += w * mu[i];
                second[i] += w * (mu[i] * mu[i] + v);
            }
        }
        (mean, second)
    }

    /// Exact draw from the mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut j = self.len() - 1;
        for (idx, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                j = idx;
                break;
            }
        }
        let sd = self.variances[j].sqrt();
        self.means[j]
            .iter()
            .map(|m| m + sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

/// Mixture potential, evaluated with a streaming log-sum-exp.
#[derive(Debug, Clone)]
pub struct MixtureTarget {
    spec: MixtureSpec,
    log_coef: Vec<f64>,
    label: String,
}

pub fn build_mixture_target(spec: MixtureSpec) -> Result<MixtureTarget> {
    spec.validate()?;
    let d = spec.dim() as f64;
    let log_coef = spec
        .weights
        .iter()
        .zip(&spec.variances)
        .map(|(w, v)| w.ln() - 0.5 * d * (2.0 * PI * v).ln())
        .collect();
    let label = format!("mixture-{}x{}d", spec.len(), spec.dim());
    Ok(MixtureTarget { spec, log_coef, label })
}

impl MixtureTarget {
    pub fn spec(&self) -> &MixtureSpec {
        &self.spec
    }

    fn component_log_density(&self, j: usize, x: &[f64]) -> f64 {
        let ss: f64 = x
            .iter()
            .zip(&self.spec.means[j])
            .map(|(a, m)| (a - m) * (a - m))
            .sum();
        self.log_coef[j] - ss / (2.0 * self.spec.variances[j])
    }
}

impl TargetDensity for MixtureTarget {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for j in 0..self.spec.len() {
            let l = self.component_log_density(j, x);
            if l > max {
                sum = sum * (max - l).exp() + 1.0;
                max = l;
            } else {
                sum += (l - max).exp();
            }
        }
        -(max + sum.ln())
    }

    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        // running max / rescaled sums so that no scratch buffer is needed
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        grad.fill(0.0);
        for j in 0..self.spec.len() {
            let l = self.component_log_density(j, x);
            let var = self.spec.variances[j];
            let mu = &self.spec.means[j];
            let e = if l > max {
                let scale = (max - l).exp();
                sum *= scale;
                grad.iter_mut().for_each(|g| *g *= scale);
                max = l;
                1.0
            } else {
                (l - max).exp()
            };
            sum += e;
            for ((g, a), m) in grad.iter_mut().zip(x).zip(mu) {
                *g += e * (a - m) / var;
            }
        }
        grad.iter_mut().for_each(|g| *g /= sum);
        -(max + sum.ln())
    }
}
