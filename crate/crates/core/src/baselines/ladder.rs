use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest inverse temperature used by the tempering chains; `β = 0` is
/// improper on unbounded supports.
pub const MIN_TEMPERING_BETA: f64 = 0.01;

/// Strictly increasing inverse temperatures ending at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TemperatureLadder {
    betas: Vec<f64>,
}

impl TemperatureLadder {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidSpec("temperature ladder is empty".into()));
        }
        if betas.iter().any(|b| !b.is_finite()) || betas[0] < 0.0 {
            return Err(Error::InvalidSpec("ladder entries must be finite and non-negative".into()));
        }
        if betas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("ladder must be strictly increasing".into()));
        }
        if *betas.last().unwrap() != 1.0 {
            return Err(Error::InvalidSpec("ladder must end at β = 1".into()));
        }
        Ok(Self { betas })
    }

    /// `len` equally spaced rungs from `start` to 1.
    pub fn uniform(len: usize, start: f64) -> Result<Self> {
        match len {
            0 => Self::new(Vec::new()),
            1 => Self::new(vec![1.0]),
            _ => {
                let last = (len - 1) as f64;
                let mut betas: Vec<f64> = (0..len).map(|t| start + (1.0 - start) * t as f64 / last).collect();
                betas[len - 1] = 1.0;
                Self::new(betas)
            }
        }
    }

    /// `len` geometrically spaced rungs from `start > 0` to 1.
    pub fn geometric(len: usize, start: f64) -> Result<Self> {
        if !(start > 0.0 && start < 1.0) {
            return Err(Error::InvalidSpec(format!("geometric ladder needs 0 < start < 1, got {start}")));
        }
        match len {
            0 => Self::new(Vec::new()),
            1 => Self::new(vec![1.0]),
            _ => {
                let last = (len - 1) as f64;
                let mut betas: Vec<f64> = (0..len).map(|t| start.powf((last - t as f64) / last)).collect();
                betas[len - 1] = 1.0;
                Self::new(betas)
            }
        }
    }

    /// Default parallel-tempering ladder: 10 geometric rungs from 0.01.
    pub fn default_parallel() -> Self {
        Self::geometric(10, MIN_TEMPERING_BETA).expect("valid default ladder")
    }

    /// Default simulated-tempering ladder: 1000 uniform rungs from 0.01.
    pub fn default_simulated() -> Self {
        Self::uniform(1000, MIN_TEMPERING_BETA).expect("valid default ladder")
    }

    /// Default annealing schedule: 1000 uniform rungs from 0.
    pub fn default_annealing() -> Self {
        Self::uniform(1000, 0.0).expect("valid default ladder")
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }
}

impl TryFrom<Vec<f64>> for TemperatureLadder {
    type Error = Error;
    fn try_from(betas: Vec<f64>) -> Result<Self> {
        Self::new(betas)
    }
}

impl From<TemperatureLadder> for Vec<f64> {
    fn from(ladder: TemperatureLadder) -> Self {
        ladder.betas
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_ladders_are_rejected() {
        for betas in [vec![], vec![0.5], vec![0.2, 0.2, 1.0], vec![-0.1, 1.0], vec![0.5, 0.3, 1.0]] {
            assert!(TemperatureLadder::new(betas).is_err());
        }
    }

    #[test]
    fn constructors_end_at_one() {
        let u = TemperatureLadder::uniform(5, 0.0).unwrap();
        assert_eq!(u.betas(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = TemperatureLadder::geometric(3, 0.01).unwrap();
        assert!((g.betas()[1] - 0.1).abs() < 1e-15);
        assert_eq!(g.betas()[2], 1.0);
        assert_eq!(TemperatureLadder::default_simulated().len(), 1000);
        assert_eq!(TemperatureLadder::default_parallel().betas()[0], 0.01);
    }

    #[test]
    fn serde_validates() {
        let ladder: TemperatureLadder = serde_json::from_str("[0.5, 1.0]").unwrap();
        assert_eq!(ladder.len(), 2);
        assert!(serde_json::from_str::<TemperatureLadder>("[0.5, 0.9]").is_err());
    }
}
