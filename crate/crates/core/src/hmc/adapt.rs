//! Dual-averaging step-size adaptation (Nesterov's scheme as used by NUTS).

const GAMMA: f64 = 0.05;
const T0: f64 = 10.0;
const KAPPA: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct DualAveraging {
    mu: f64,
    target_accept: f64,
    iteration: usize,
    mean_error: f64,
    log_step: f64,
    log_step_avg: f64,
}

impl DualAveraging {
    /// Shrinks towards `10 × initial_step`.
    pub fn new(initial_step: f64, target_accept: f64) -> Self {
        Self {
            mu: (10.0 * initial_step).ln(),
            target_accept,
            iteration: 0,
            mean_error: 0.0,
            log_step: initial_step.ln(),
            log_step_avg: 0.0,
        }
    }

    /// Feeds one acceptance statistic and returns the next step size.
    pub fn update(&mut self, accept_stat: f64) -> f64 {
        self.iteration += 1;
        let t = self.iteration as f64;
        let eta = 1.0 / (t + T0);
        let accept = if accept_stat.is_finite() { accept_stat.clamp(0.0, 1.0) } else { 0.0 };
        self.mean_error = (1.0 - eta) * self.mean_error + eta * (self.target_accept - accept);
        self.log_step = self.mu - t.sqrt() / GAMMA * self.mean_error;
        let weight = t.powf(-KAPPA);
        self.log_step_avg = weight * self.log_step + (1.0 - weight) * self.log_step_avg;
        self.log_step.exp()
    }

    pub fn current_step(&self) -> f64 {
        self.log_step.exp()
    }

    /// The averaged step size used once adaptation stops.
    pub fn final_step(&self) -> f64 {
        if self.iteration == 0 {
            self.current_step()
        } else {
            self.log_step_avg.exp()
        }
    }
}

/// Replays a warmup history of acceptance statistics and returns the frozen step size.
pub fn dual_averaging_adapt(initial_step: f64, history: &[f64], target_accept: f64) -> f64 {
    let mut da = DualAveraging::new(initial_step, target_accept);
    for a in history {
        da.update(*a);
    }
    da.final_step()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn on_target_acceptance_is_a_fixed_point() {
        let mut da = DualAveraging::new(0.1, 0.8);
        for _ in 0..500 {
            let step = da.update(0.8);
            assert!((step - 1.0).abs() < 1e-12);
        }
        assert!((da.final_step() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_acceptance_shrinks_strictly() {
        let mut da = DualAveraging::new(0.5, 0.8);
        let mut previous = f64::INFINITY;
        for _ in 0..200 {
            let step = da.update(0.0);
            assert!(step < previous);
            previous = step;
        }
    }

    #[test]
    fn replay_matches_incremental_updates() {
        let history = [0.9, 0.2, 0.7, 1.0, 0.5];
        let mut da = DualAveraging::new(0.3, 0.8);
        history.iter().for_each(|a| {
            da.update(*a);
        });
        assert_eq!(dual_averaging_adapt(0.3, &history, 0.8), da.final_step());
    }
}
