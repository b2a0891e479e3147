use super::LogDensity;

/// Position, momentum and the cached log-density/gradient at the position.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub position: Vec<f64>,
    pub momentum: Vec<f64>,
    pub log_density: f64,
    pub gradient: Vec<f64>,
}

/// Non-finite position, momentum or log-density during integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence;

impl PhasePoint {
    /// Evaluates the density at `position`; momentum starts at zero.
    pub fn at<D: LogDensity + ?Sized>(density: &D, position: Vec<f64>) -> Self {
        let mut gradient = vec![0.0; position.len()];
        let log_density = density.log_density_and_gradient(&position, &mut gradient);
        let momentum = vec![0.0; position.len()];
        Self { position, momentum, log_density, gradient }
    }

    pub fn is_finite(&self) -> bool {
        self.log_density.is_finite()
            && self.position.iter().all(|v| v.is_finite())
            && self.momentum.iter().all(|v| v.is_finite())
            && self.gradient.iter().all(|v| v.is_finite())
    }

    /// `½ ρᵀ M⁻¹ ρ`.
    pub fn kinetic_energy(&self, inv_mass: &[f64]) -> f64 {
        0.5 * self.momentum.iter().zip(inv_mass).map(|(p, m)| p * p * m).sum::<f64>()
    }

    /// `H = −log π(y) + ½ ρᵀ M⁻¹ ρ`.
    pub fn hamiltonian(&self, inv_mass: &[f64]) -> f64 {
        -self.log_density + self.kinetic_energy(inv_mass)
    }
}

/// Runs `steps` leapfrog steps of size `step_size` in place: half-kick with
/// `∇ log π`, drift `y ← y + ε M⁻¹ ρ`, half-kick. A negative step size
/// integrates backwards in time.
pub fn leapfrog<D: LogDensity + ?Sized>(
    density: &D,
    point: &mut PhasePoint,
    step_size: f64,
    steps: usize,
    inv_mass: &[f64],
) -> Result<(), Divergence> {
    let half = 0.5 * step_size;
    for _ in 0..steps {
        for (p, g) in point.momentum.iter_mut().zip(&point.gradient) {
            *p += half * g;
        }
        for ((y, p), m) in point.position.iter_mut().zip(&point.momentum).zip(inv_mass) {
            *y += step_size * m * p;
        }
        point.log_density = density.log_density_and_gradient(&point.position, &mut point.gradient);
        for (p, g) in point.momentum.iter_mut().zip(&point.gradient) {
            *p += half * g;
        }
        if !point.is_finite() {
            return Err(Divergence);
        }
    }
    Ok(())
}

/// Value-returning form of [`leapfrog`] with an identity mass matrix.
pub fn integrate<D: LogDensity + ?Sized>(
    density: &D,
    position: &[f64],
    momentum: &[f64],
    step_size: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>), Divergence> {
    let mut point = PhasePoint::at(density, position.to_vec());
    point.momentum = momentum.to_vec();
    let inv_mass = vec![1.0; position.len()];
    leapfrog(density, &mut point, step_size, steps, &inv_mass)?;
    Ok((point.position, point.momentum))
}
