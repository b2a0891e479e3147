use super::TargetDensity;
use crate::error::{Error, Result};
use crate::math::{sigmoid, softplus};
use crate::rng::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Logistic regression with a regularized horseshoe prior.
///
/// `Pr(Y = 1) = 1 / (1 + exp(zᵀx))`, `x_j | λ_j, τ ~ N(0, τ² λ̃_j²)` with
/// `λ̃_j² = c²λ_j² / (c² + τ²λ_j²)`, `λ_j ~ C⁺(0, 1)` and `τ ~ C⁺(0, tau_scale)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HorseshoeModel {
    /// Row-major `n × p` covariates.
    pub covariates: Vec<Vec<f64>>,
    pub responses: Vec<u8>,
    pub slab_scale: f64,
    #[serde(default = "default_tau_scale")]
    pub tau_scale: f64,
}

fn default_tau_scale() -> f64 {
    1.0
}

/// Recipe for a synthetic sparse dataset with known coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDesign {
    pub n: usize,
    pub p: usize,
    pub active: usize,
    pub effect: f64,
    pub seed: u64,
}

impl Default for SyntheticDesign {
    fn default() -> Self {
        Self { n: 50, p: 20, active: 3, effect: 3.0, seed: 1 }
    }
}

impl SyntheticDesign {
    /// Draws standard-normal covariates and labels from the model itself; the
    /// first `active` coefficients alternate in sign with magnitude `effect`,
    /// the rest are zero. Returns the model and the true coefficients.
    pub fn generate(&self, slab_scale: f64) -> Result<(HorseshoeModel, Vec<f64>)> {
        if self.active > self.p {
            return Err(Error::InvalidSpec("more active coefficients than covariates".into()));
        }
        let mut rng = stream_rng(self.seed, 0);
        let coef: Vec<f64> = (0..self.p)
            .map(|j| match j < self.active {
                true if j % 2 == 0 => self.effect,
                true => -self.effect,
                false => 0.0,
            })
            .collect();
        let mut covariates = Vec::with_capacity(self.n);
        let mut responses = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            let z: Vec<f64> = (0..self.p).map(|_| rng.sample(StandardNormal)).collect();
            let eta: f64 = z.iter().zip(&coef).map(|(a, b)| a * b).sum();
            let prob_one = sigmoid(-eta);
            responses.push(u8::from(rng.random::<f64>() < prob_one));
            covariates.push(z);
        }
        let model = HorseshoeModel { covariates, responses, slab_scale, tau_scale: 1.0 };
        Ok((model, coef))
    }
}

#[derive(Debug, Clone)]
pub struct HorseshoeTarget {
    model: HorseshoeModel,
    p: usize,
}

pub fn build_horseshoe_target(model: HorseshoeModel) -> Result<HorseshoeTarget> {
    if model.covariates.len() != model.responses.len() {
        return Err(Error::DimensionMismatch {
            expected: model.covariates.len(),
            found: model.responses.len(),
        });
    }
    let p = model.covariates.first().map_or(0, Vec::len);
    if p == 0 {
        return Err(Error::InvalidSpec("horseshoe model needs at least one covariate".into()));
    }
    if let Some(row) = model.covariates.iter().find(|r| r.len() != p) {
        return Err(Error::DimensionMismatch { expected: p, found: row.len() });
    }
    if model.responses.iter().any(|&y| y > 1) {
        return Err(Error::InvalidSpec("responses must be 0 or 1".into()));
    }
    if !(model.slab_scale > 0.0) || !(model.tau_scale > 0.0) {
        return Err(Error::InvalidSpec("slab and global scales must be positive".into()));
    }
    Ok(HorseshoeTarget { model, p })
}

impl HorseshoeTarget {
    pub fn num_covariates(&self) -> usize {
        self.p
    }

    /// Splits an unconstrained point into `(x, log λ, log τ)`.
    pub fn unpack<'a>(&self, y: &'a [f64]) -> (&'a [f64], &'a [f64], f64) {
        (&y[..self.p], &y[self.p..2 * self.p], y[2 * self.p])
    }

    fn evaluate(&self, y: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.p;
        let (x, log_lambda, log_tau) = self.unpack(y);
        let c2 = self.model.slab_scale * self.model.slab_scale;
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut log_post = 0.0;

        // likelihood: y log p + (1 - y) log(1 - p) with p = sigmoid(-η)
        for (z, &label) in self.model.covariates.iter().zip(&self.model.responses) {
            let eta: f64 = z.iter().zip(x).map(|(a, b)| a * b).sum();
            let miss = f64::from(1 - label);
            log_post += miss * eta - softplus(eta);
            if let Some(g) = grad.as_deref_mut() {
                let d_eta = miss - sigmoid(eta);
                for (gj, zj) in g[..p].iter_mut().zip(z) {
                    *gj += d_eta * zj;
                }
            }
        }

        // conditional normal prior on x_j with log-scale chain rule
        let mut d_log_tau = 0.0;
        for j in 0..p {
            let s = 2.0 * (log_tau + log_lambda[j]);
            let tl2 = s.exp();
            let log_var = s + c2.ln() - (c2 + tl2).ln();
            let var = log_var.exp();
            log_post += -0.5 * (2.0 * PI).ln() - 0.5 * log_var - x[j] * x[j] / (2.0 * var);
            if let Some(g) = grad.as_deref_mut() {
                g[j] += -x[j] / var;
                let d_log_var = -0.5 + x[j] * x[j] / (2.0 * var);
                let kappa = 2.0 * c2 / (c2 + tl2);
                g[p + j] += d_log_var * kappa;
                d_log_tau += d_log_var * kappa;
            }
        }

        // half-Cauchy priors on λ_j and τ, plus log-Jacobians
        for j in 0..p {
            let a = log_lambda[j];
            log_post += (2.0 / PI).ln() - softplus(2.0 * a) + a;
            if let Some(g) = grad.as_deref_mut() {
                g[p + j] += 1.0 - 2.0 * sigmoid(2.0 * a);
            }
        }
        let t = log_tau - self.model.tau_scale.ln();
        log_post += (2.0 / PI).ln() - self.model.tau_scale.ln() - softplus(2.0 * t) + log_tau;
        d_log_tau += 1.0 - 2.0 * sigmoid(2.0 * t);

        if let Some(g) = grad {
            g[2 * p] = d_log_tau;
            // gradient of the potential is minus the log-posterior gradient
            g.iter_mut().for_each(|v| *v = -*v);
        }
        -log_post
    }
}

impl TargetDensity for HorseshoeTarget {
    fn dim(&self) -> usize {
        2 * self.p + 1
    }

    fn label(&self) -> &str {
        "horseshoe-logistic"
    }

    fn potential(&self, y: &[f64]) -> f64 {
        self.evaluate(y, None)
    }

    fn potential_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        self.evaluate(y, Some(grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_is_two_p_plus_one() {
        let (model, coef) = SyntheticDesign::default().generate(2.0).unwrap();
        assert_eq!(coef.iter().filter(|c| **c != 0.0).count(), 3);
        let t = build_horseshoe_target(model).unwrap();
        assert_eq!(t.dim(), 41);
        assert!(t.potential(&vec![0.1; 41]).is_finite());
    }

    #[test]
    fn rejects_label_count_mismatch() {
        let model = HorseshoeModel {
            covariates: vec![vec![1.0], vec![2.0]],
            responses: vec![1],
            slab_scale: 2.0,
            tau_scale: 1.0,
        };
        assert!(matches!(build_horseshoe_target(model), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_covariates_leave_a_symmetric_posterior_in_x() {
        let model = HorseshoeModel {
            covariates: vec![vec![0.0]; 10],
            responses: vec![0, 1, 1, 0, 1, 0, 0, 1, 1, 0],
            slab_scale: 2.0,
            tau_scale: 1.0,
        };
        let t = build_horseshoe_target(model).unwrap();
        assert!((t.potential(&[0.7, 0.2, -0.3]) - t.potential(&[-0.7, 0.2, -0.3])).abs() < 1e-12);
    }
}
