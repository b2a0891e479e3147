use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

/// Instrumental density `q(x) ∝ exp{-δ(x)}`; it only has to be evaluable.
pub trait InstrumentalDistribution: Send + Sync {
    fn dim(&self) -> usize;

    fn delta(&self, x: &[f64]) -> f64;

    /// Writes `∇δ(x)` into `grad` and returns `δ(x)`.
    fn delta_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn label(&self) -> &str {
        "instrumental"
    }
}

impl<Q: InstrumentalDistribution + ?Sized> InstrumentalDistribution for &Q {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn delta(&self, x: &[f64]) -> f64 {
        (**self).delta(x)
    }
    fn delta_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).delta_and_gradient(x, grad)
    }
    fn label(&self) -> &str {
        (**self).label()
    }
}

/// Isotropic Gaussian `N(mean, variance·I)` with `δ(x) = ‖x − mean‖² / (2·variance)`.
///
/// `δ` omits the normalizing constant; [`GaussianInstrumental::log_normalizer`]
/// returns it for callers that need `∫ exp{-δ}`.
#[derive(Debug, Clone)]
pub struct GaussianInstrumental {
    mean: Vec<f64>,
    variance: f64,
}

impl GaussianInstrumental {
    pub fn new(mean: Vec<f64>, variance: f64) -> Self {
        assert!(variance > 0.0, "variance must be positive");
        Self { mean, variance }
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(vec![0.0; dim], 1.0)
    }

    /// `log ∫ exp{-δ(x)} dx`.
    pub fn log_normalizer(&self) -> f64 {
        0.5 * self.mean.len() as f64 * (2.0 * PI * self.variance).ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let sd = self.variance.sqrt();
        for (o, m) in out.iter_mut().zip(&self.mean) {
            *o = m + sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
}

impl InstrumentalDistribution for GaussianInstrumental {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn delta(&self, x: &[f64]) -> f64 {
        let ss: f64 = x.iter().zip(&self.mean).map(|(a, m)| (a - m) * (a - m)).sum();
        ss / (2.0 * self.variance)
    }

    fn delta_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        for ((g, a), m) in grad.iter_mut().zip(x).zip(&self.mean) {
            *g = (a - m) / self.variance;
        }
        self.delta(x)
    }

    fn label(&self) -> &str {
        "gaussian"
    }
}
