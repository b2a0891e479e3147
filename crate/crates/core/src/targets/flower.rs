use super::TargetDensity;
use crate::error::{Error, Result};

/// Ring of radius `r` perturbed by `A·cos(ωθ)`; the density concentrates on
/// the petal curve `ρ = r + A cos(ωθ)` with Gaussian width `σ`.
#[derive(Debug, Clone)]
pub struct FlowerTarget {
    radius: f64,
    amplitude: f64,
    frequency: f64,
    sigma: f64,
}

pub fn build_flower_target(radius: f64, amplitude: f64, frequency: f64, sigma: f64) -> Result<FlowerTarget> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidSpec(format!("flower sigma must be positive, got {sigma}")));
    }
    Ok(FlowerTarget { radius, amplitude, frequency, sigma })
}

impl FlowerTarget {
    pub fn default_petals() -> Self {
        build_flower_target(10.0, 6.0, 6.0, 1.0).expect("valid defaults")
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    /// Angles of the petal tips (where `cos(ωθ) = 1`), in `(-π, π]`.
    pub fn petal_angles(&self) -> Vec<f64> {
        let count = self.frequency.round().max(1.0) as usize;
        (0..count)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / self.frequency;
                if a > std::f64::consts::PI { a - 2.0 * std::f64::consts::PI } else { a }
            })
            .collect()
    }

    fn deviation(&self, x: &[f64]) -> (f64, f64, f64) {
        let rho = x[0].hypot(x[1]);
        let theta = x[1].atan2(x[0]);
        let dev = rho - self.radius - self.amplitude * (self.frequency * theta).cos();
        (dev, rho, theta)
    }
}

impl TargetDensity for FlowerTarget {
    fn dim(&self) -> usize {
        2
    }

    fn label(&self) -> &str {
        "flower"
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let (dev, _, _) = self.deviation(x);
        dev * dev / (2.0 * self.sigma * self.sigma)
    }

    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (dev, rho, theta) = self.deviation(x);
        let phi = dev * dev / (2.0 * self.sigma * self.sigma);
        if rho == 0.0 {
            // undefined at the origin; zero by convention
            grad.fill(0.0);
            return phi;
        }
        let scale = dev / (self.sigma * self.sigma);
        let ang = self.amplitude * self.frequency * (self.frequency * theta).sin() / (rho * rho);
        grad[0] = scale * (x[0] / rho - ang * x[1]);
        grad[1] = scale * (x[1] / rho + ang * x[0]);
        phi
    }
}
