//! Differentiable target densities `π(x) ∝ exp{-φ(x)}` and the benchmark
//! targets used by the experiments.
//!
//! Every target exposes its potential `φ` (negative unnormalized log-density)
//! and a hand-derived gradient. Targets are immutable once built and can be
//! shared between concurrently running chains.

mod banana;
mod flower;
mod gaussian;
mod horseshoe;
mod mixture;

pub use banana::{build_banana_target, BananaTarget};
pub use flower::{build_flower_target, FlowerTarget};
pub use gaussian::GaussianTarget;
pub use horseshoe::{build_horseshoe_target, HorseshoeModel, HorseshoeTarget, SyntheticDesign};
pub use mixture::{build_mixture_target, MixtureSpec, MixtureTarget, MixtureTruth};

use std::sync::Arc;

/// A target density over `R^dim` described by its potential `φ`.
pub trait TargetDensity: Send + Sync {
    fn dim(&self) -> usize;

    fn label(&self) -> &str;

    /// `φ(x)` in nats.
    fn potential(&self, x: &[f64]) -> f64;

    /// Writes `∇φ(x)` into `grad` and returns `φ(x)`.
    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.potential_and_gradient(x, &mut g);
        g
    }
}

pub type SharedTarget = Arc<dyn TargetDensity>;

impl<T: TargetDensity + ?Sized> TargetDensity for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
    fn potential(&self, x: &[f64]) -> f64 {
        (**self).potential(x)
    }
    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).potential_and_gradient(x, grad)
    }
}

impl<T: TargetDensity + ?Sized> TargetDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn label(&self) -> &str {
        (**self).label()
    }
    fn potential(&self, x: &[f64]) -> f64 {
        (**self).potential(x)
    }
    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).potential_and_gradient(x, grad)
    }
}

/// Target with `φ ≡ 0`: improper, only meaningful for kernel plumbing tests.
#[derive(Debug, Clone)]
pub struct FlatTarget {
    dim: usize,
}

impl FlatTarget {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl TargetDensity for FlatTarget {
    fn dim(&self) -> usize {
        self.dim
    }
    fn label(&self) -> &str {
        "flat"
    }
    fn potential(&self, _x: &[f64]) -> f64 {
        0.0
    }
    fn potential_and_gradient(&self, _x: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        0.0
    }
}
