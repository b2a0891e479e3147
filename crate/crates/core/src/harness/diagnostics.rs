use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::extended::WeightedSampleSet;
use crate::targets::{FlowerTarget, MixtureSpec};

/// Effective sample size of a scalar chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssEstimate {
    pub ess: f64,
    /// The chain is constant; `ess` is reported as 1.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Biased autocovariance at every lag, computed by FFT.
fn autocovariance(chain: &[f64]) -> Vec<f64> {
    let n = chain.len();
    let mean = chain.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buffer: Vec<Complex<f64>> = chain.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    buffer.resize(size, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buffer);
    buffer.iter_mut().for_each(|c| *c = Complex::new(c.norm_sqr(), 0.0));
    planner.plan_fft_inverse(size).process(&mut buffer);
    buffer[..n].iter().map(|c| c.re / (size as f64 * n as f64)).collect()
}

/// `T / (1 + 2 Σ ρ̂_k)` with Geyer's initial positive sequence truncation,
/// clipped to `[1, T]`.
pub fn compute_ess(chain: &[f64]) -> Result<EssEstimate> {
    let n = chain.len();
    if n < 10 {
        return Err(Error::InvalidSpec(format!("ESS needs at least 10 draws, got {n}")));
    }
    let acov = autocovariance(chain);
    let scale = chain.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if !(acov[0] > 1e-28 * scale * scale) {
        return Ok(EssEstimate { ess: 1.0, degenerate: true, note: Some("constant chain".into()) });
    }
    let rho: Vec<f64> = acov.iter().map(|c| c / acov[0]).collect();
    let mut tau = -1.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let pair = rho[2 * k] + rho[2 * k + 1];
        if k > 0 && pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 1;
    }
    let raw = n as f64 / tau;
    if !(raw > 0.0) || raw > n as f64 {
        return Ok(EssEstimate {
            ess: n as f64,
            degenerate: false,
            note: Some("negative autocorrelation; ESS capped at T".into()),
        });
    }
    Ok(EssEstimate { ess: raw.max(1.0), degenerate: false, note: None })
}

/// Root mean squared error across replications and components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rmse {
    pub value: f64,
    /// Natural logarithm of `value`.
    pub log_value: f64,
}

pub fn compute_rmse(estimates: &[Vec<f64>], truth: &[f64]) -> Result<Rmse> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for estimate in estimates {
        check_dim(truth.len(), estimate.len())?;
        for (e, t) in estimate.iter().zip(truth) {
            sum += (e - t) * (e - t);
            count += 1;
        }
    }
    let value = if count == 0 { f64::NAN } else { (sum / count as f64).sqrt() };
    Ok(Rmse { value, log_value: value.ln() })
}

/// Weighted mass attributed to each mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoverage {
    pub masses: Vec<f64>,
    pub covered: usize,
    pub threshold: f64,
}

pub const DEFAULT_RADIUS_SIGMAS: f64 = 3.0;
pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.005;

/// Assigns every draw to its nearest component mean, keeps it if it lies
/// within `radius_sigmas` standard deviations of that mean, and sums the
/// self-normalized weights per component. A component is covered when its
/// mass reaches `threshold`.
pub fn mode_coverage(
    samples: &WeightedSampleSet,
    spec: &MixtureSpec,
    radius_sigmas: f64,
    threshold: f64,
) -> Result<ModeCoverage> {
    check_dim(spec.dim(), samples.dim)?;
    let weights = samples.normalized_weights()?;
    let mut masses = vec![0.0; spec.len()];
    for (k, w) in weights.iter().enumerate() {
        let x = &samples.draws[k * samples.dim..(k + 1) * samples.dim];
        let mut nearest = 0;
        let mut best = f64::INFINITY;
        for (j, mean) in spec.means.iter().enumerate() {
            let dist: f64 = mean.iter().zip(x).map(|(m, v)| (m - v) * (m - v)).sum::<f64>().sqrt();
            if dist < best {
                best = dist;
                nearest = j;
            }
        }
        if best <= radius_sigmas * spec.variances[nearest].sqrt() {
            masses[nearest] += w;
        }
    }
    let covered = masses.iter().filter(|m| **m >= threshold).count();
    Ok(ModeCoverage { masses, covered, threshold })
}

pub const DEFAULT_PETAL_THRESHOLD: f64 = 0.01;

/// Weighted mass in equal angular bins centred on the petal tips of a flower.
pub fn petal_coverage(samples: &WeightedSampleSet, flower: &FlowerTarget, threshold: f64) -> Result<ModeCoverage> {
    check_dim(2, samples.dim)?;
    let weights = samples.normalized_weights()?;
    let angles = flower.petal_angles();
    let mut masses = vec![0.0; angles.len()];
    let tau = 2.0 * std::f64::consts::PI;
    for (k, w) in weights.iter().enumerate() {
        let x = &samples.draws[k * 2..k * 2 + 2];
        let theta = x[1].atan2(x[0]);
        let mut nearest = 0;
        let mut best = f64::INFINITY;
        for (j, a) in angles.iter().enumerate() {
            let diff = (theta - a).rem_euclid(tau);
            let dist = diff.min(tau - diff);
            if dist < best {
                best = dist;
                nearest = j;
            }
        }
        masses[nearest] += w;
    }
    let covered = masses.iter().filter(|m| **m >= threshold).count();
    Ok(ModeCoverage { masses, covered, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn autocovariance_matches_direct_sum() {
        let chain = [0.3, -1.2, 2.5, 0.7, 0.1, -0.4, 1.9, -2.2, 0.05, 0.8, 1.1];
        let n = chain.len();
        let mean = chain.iter().sum::<f64>() / n as f64;
        let fast = autocovariance(&chain);
        for lag in 0..n {
            let direct: f64 = (0..n - lag).map(|t| (chain[t] - mean) * (chain[t + lag] - mean)).sum::<f64>() / n as f64;
            assert!((fast[lag] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_and_alternating_chains() {
        let constant = compute_ess(&[2.0; 50]).unwrap();
        assert!(constant.degenerate);
        assert_eq!(constant.ess, 1.0);
        let alternating: Vec<f64> = (0..100).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ess = compute_ess(&alternating).unwrap();
        assert_eq!(ess.ess, 100.0);
        assert!(ess.note.is_some());
        assert!(compute_ess(&[1.0; 5]).is_err());
    }

    #[test]
    fn rmse_algebra() {
        assert_eq!(compute_rmse(&[vec![1.0, 2.0]], &[1.0, 2.0]).unwrap().value, 0.0);
        let r = compute_rmse(&[vec![1.0, 2.0, 3.5]], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.value - 0.5 / 3f64.sqrt()).abs() < 1e-15);
        assert!(compute_rmse(&[vec![1.0]], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn all_draws_at_first_mean() {
        let spec = MixtureSpec::scenario_a();
        let mut set = WeightedSampleSet::new("t", 2, 1, 0);
        for _ in 0..10 {
            set.push_row(&spec.means[0], &[0.0], None);
        }
        let cov = mode_coverage(&set, &spec, 3.0, 0.005).unwrap();
        assert!((cov.masses[0] - 1.0).abs() < 1e-12);
        assert!(cov.masses[1..].iter().all(|m| *m == 0.0));
        assert_eq!(cov.covered, 1);
    }
}
