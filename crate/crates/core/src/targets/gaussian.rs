use super::TargetDensity;
use std::f64::consts::PI;

/// Isotropic Gaussian `N(mean, variance·I)`, normalized.
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    mean: Vec<f64>,
    variance: f64,
    label: String,
}

impl GaussianTarget {
    pub fn new(mean: Vec<f64>, variance: f64) -> Self {
        assert!(variance > 0.0, "variance must be positive");
        let label = format!("gaussian-{}d", mean.len());
        Self { mean, variance, label }
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(vec![0.0; dim], 1.0)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

impl TargetDensity for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let ss: f64 = x.iter().zip(&self.mean).map(|(a, m)| (a - m) * (a - m)).sum();
        ss / (2.0 * self.variance) + 0.5 * self.dim() as f64 * (2.0 * PI * self.variance).ln()
    }

    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        for ((g, a), m) in grad.iter_mut().zip(x).zip(&self.mean) {
            *g = (a - m) / self.variance;
        }
        self.potential(x)
    }
}
