use super::TargetDensity;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Warped Gaussian `N(x₁ | 0, ν) · N(x₂ | b(x₁² − ν), 1)`.
#[derive(Debug, Clone)]
pub struct BananaTarget {
    b: f64,
    nu: f64,
    log_norm: f64,
}

pub fn build_banana_target(b: f64, nu: f64) -> Result<BananaTarget> {
    if !(nu > 0.0) {
        return Err(Error::InvalidSpec(format!("banana variance nu must be positive, got {nu}")));
    }
    let log_norm = 0.5 * (2.0 * PI * nu).ln() + 0.5 * (2.0 * PI).ln();
    Ok(BananaTarget { b, nu, log_norm })
}

impl BananaTarget {
    pub const DEFAULT_B: f64 = 0.1;
    pub const DEFAULT_NU: f64 = 100.0;

    /// Exact `(E[X], E[X²])`: `x₂ − b(x₁² − ν)` is standard normal and independent of `x₁`.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let var_x1_sq = 2.0 * self.nu * self.nu;
        (vec![0.0, 0.0], vec![self.nu, 1.0 + self.b * self.b * var_x1_sq])
    }

    fn ridge_residual(&self, x: &[f64]) -> f64 {
        x[1] - self.b * (x[0] * x[0] - self.nu)
    }
}

impl TargetDensity for BananaTarget {
    fn dim(&self) -> usize {
        2
    }

    fn label(&self) -> &str {
        "banana"
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let r = self.ridge_residual(x);
        x[0] * x[0] / (2.0 * self.nu) + 0.5 * r * r + self.log_norm
    }

    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let r = self.ridge_residual(x);
        grad[0] = x[0] / self.nu - 2.0 * self.b * x[0] * r;
        grad[1] = r;
        x[0] * x[0] / (2.0 * self.nu) + 0.5 * r * r + self.log_norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_warp_is_product_of_standard_normals() {
        let t = build_banana_target(0.0, 1.0).unwrap();
        let c = (2.0 * PI).ln();
        assert!((t.potential(&[0.0, 0.0]) - c).abs() < 1e-14);
        assert!((t.potential(&[1.0, -2.0]) - (c + 0.5 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn ridge_point_has_only_the_constant() {
        let t = build_banana_target(0.1, 100.0).unwrap();
        assert!((t.potential(&[0.0, -10.0]) - t.log_norm).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_nu() {
        assert!(build_banana_target(0.1, 0.0).is_err());
    }
}
