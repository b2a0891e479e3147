//! Numerical self-checks: finite-difference gradients, leapfrog contracts
//! and exactness of the weighted estimator on enumerable toys. The CLI runs
//! them as `pseudoext check`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::boltzmann::{generate_relaxation, relaxation_target};
use crate::extended::{
    plain_extended_log_density, plain_log_weight, self_normalize, ExtendedTarget, GaussianInstrumental,
    InstrumentalDistribution, PowerTemperature, TemperedExtendedTarget, FlatTemperature,
};
use crate::hmc::{leapfrog, posterior, LogDensity, PhasePoint};
use crate::rng::stream_rng;
use crate::targets::{
    build_banana_target, build_horseshoe_target, build_mixture_target, FlowerTarget, GaussianTarget, MixtureSpec,
    SharedTarget, SyntheticDesign, TargetDensity,
};

/// Gradient relative-error bound used by the suite.
pub const GRADIENT_TOLERANCE: f64 = 1e-5;

/// Central differences with step `1e-6·(1 + |x_i|)`.
pub fn finite_difference_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 1e-6 * (1.0 + x[i].abs());
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖∞ / max(‖a‖∞, ‖b‖∞, 1e-6)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = a.iter().chain(b).fold(1e-6f64, |m, v| m.max(v.abs()));
    diff / scale
}

/// Worst relative error between the analytic gradient of `density` and
/// central differences of its log-density over `points`.
pub fn gradient_error<D: LogDensity + ?Sized>(density: &D, points: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for x in points {
        let mut analytic = vec![0.0; x.len()];
        density.log_density_and_gradient(x, &mut analytic);
        let numeric = finite_difference_gradient(|y| density.log_density(y), x);
        let err = relative_error(&analytic, &numeric);
        worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
    }
    worst
}

/// `log q = −δ` as a log-density, so instrumentals share the gradient check.
struct Instrumental<Q>(Q);

impl<Q: InstrumentalDistribution> LogDensity for Instrumental<Q> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn log_density(&self, y: &[f64]) -> f64 {
        -self.0.delta(y)
    }
    fn log_density_and_gradient(&self, y: &[f64], grad: &mut [f64]) -> f64 {
        let delta = self.0.delta_and_gradient(y, grad);
        grad.iter_mut().for_each(|g| *g = -*g);
        -delta
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: String,
    pub passed: bool,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<44} {:>12.3e}  ({})", self.name, self.value, self.tolerance)
    }
}

fn box_points<R: Rng>(rng: &mut R, count: usize, low: &[f64], high: &[f64]) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| low.iter().zip(high).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect())
        .collect()
}

fn normal_points<R: Rng>(rng: &mut R, count: usize, dim: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()).collect()
}

/// Points for an extended state: `x` blocks from `x_points`, then `n` temperatures in `[-3, 3]`.
fn extended_points<R: Rng>(rng: &mut R, count: usize, n: usize, tempered: bool, x_point: impl Fn(&mut R) -> Vec<f64>) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut y = Vec::new();
            for _ in 0..n {
                y.extend(x_point(rng));
            }
            if tempered {
                y.extend((0..n).map(|_| -3.0 + 6.0 * rng.random::<f64>()));
            }
            y
        })
        .collect()
}

/// Every analytic gradient in the crate against central differences at
/// `points` random locations each.
pub fn gradient_suite(points: usize, seed: u64) -> Vec<CheckOutcome> {
    let mut rng = stream_rng(seed, 0);
    let mut cases: Vec<(String, f64)> = Vec::new();
    let mut target_case = |name: &str, target: SharedTarget, pts: Vec<Vec<f64>>| {
        cases.push((format!("gradient: {name}"), gradient_error(&posterior(&target), &pts)));
    };

    let scenario_a: SharedTarget = Arc::new(build_mixture_target(MixtureSpec::scenario_a()).unwrap());
    let scenario_b: SharedTarget = Arc::new(build_mixture_target(MixtureSpec::scenario_b()).unwrap());
    let bimodal: SharedTarget = Arc::new(build_mixture_target(MixtureSpec::bimodal()).unwrap());
    let gaussian: SharedTarget = Arc::new(GaussianTarget::new(vec![1.0, -2.0, 0.5], 2.0));
    let banana: SharedTarget = Arc::new(build_banana_target(0.1, 100.0).unwrap());
    let flower: SharedTarget = Arc::new(FlowerTarget::default_petals());
    let (model, _) = SyntheticDesign::default().generate(2.0).unwrap();
    let horseshoe: SharedTarget = Arc::new(build_horseshoe_target(model).unwrap());
    let relax = generate_relaxation(seed, 10, 6.0, 2.0).unwrap();
    let boltzmann: SharedTarget = Arc::new(relaxation_target(&relax));

    let pts = box_points(&mut rng, points, &[0.0, 0.0], &[10.0, 10.0]);
    target_case("mixture scenario (a)", scenario_a.clone(), pts);
    let pts = box_points(&mut rng, points, &[0.0, 0.0], &[10.0, 10.0]);
    target_case("mixture scenario (b)", scenario_b.clone(), pts);
    let pts = box_points(&mut rng, points, &[-2.0], &[2.0]);
    target_case("bimodal mixture", bimodal.clone(), pts);
    let pts = normal_points(&mut rng, points, 3, 2.0);
    target_case("gaussian", gaussian, pts);
    let pts = box_points(&mut rng, points, &[-20.0, -10.0], &[20.0, 10.0]);
    target_case("banana", banana, pts);
    let pts = box_points(&mut rng, points, &[-16.0, -16.0], &[16.0, 16.0]);
    target_case("flower", flower, pts);
    let pts = normal_points(&mut rng, points, horseshoe.dim(), 1.0);
    target_case("horseshoe logistic regression", horseshoe, pts);
    let pts = normal_points(&mut rng, points, boltzmann.dim(), 2.0);
    target_case("boltzmann relaxation", boltzmann.clone(), pts);

    let q = GaussianInstrumental::new(vec![1.0, -0.5], 3.0);
    let pts = normal_points(&mut rng, points, 2, 2.0);
    cases.push(("gradient: gaussian instrumental".into(), gradient_error(&Instrumental(q), &pts)));

    let extended = ExtendedTarget::new(scenario_a.clone(), GaussianInstrumental::new(vec![5.0, 5.0], 9.0), 3).unwrap();
    let pts = extended_points(&mut rng, points, 3, false, |r| vec![10.0 * r.random::<f64>(), 10.0 * r.random::<f64>()]);
    cases.push(("gradient: extended (scenario a, N=3)".into(), gradient_error(&extended, &pts)));

    let extended = ExtendedTarget::new(bimodal.clone(), GaussianInstrumental::new(vec![0.0], 4.0), 2).unwrap();
    let pts = extended_points(&mut rng, points, 2, false, |r| vec![-2.0 + 4.0 * r.random::<f64>()]);
    cases.push(("gradient: extended (bimodal, N=2)".into(), gradient_error(&extended, &pts)));

    let tempered = TemperedExtendedTarget::new(scenario_a, 3).unwrap();
    let pts = extended_points(&mut rng, points, 3, true, |r| vec![10.0 * r.random::<f64>(), 10.0 * r.random::<f64>()]);
    cases.push(("gradient: tempered extended (scenario a, N=3)".into(), gradient_error(&tempered, &pts)));

    let tempered = TemperedExtendedTarget::with_temperature_densities(
        boltzmann.clone(),
        2,
        Arc::new(FlatTemperature),
        Arc::new(PowerTemperature { exponent: 1.5 }),
    )
    .unwrap();
    let d = boltzmann.dim();
    let pts = extended_points(&mut rng, points, 2, true, |r| (0..d).map(|_| 2.0 * r.sample::<f64, _>(StandardNormal)).collect());
    cases.push(("gradient: tempered extended (boltzmann, N=2)".into(), gradient_error(&tempered, &pts)));

    cases
        .into_iter()
        .map(|(name, value)| CheckOutcome {
            name,
            value,
            tolerance: format!("rel err <= {GRADIENT_TOLERANCE:e}"),
            passed: value <= GRADIENT_TOLERANCE,
        })
        .collect()
}

/// `max |z − z''|` after `L` steps forward, a momentum flip and `L` steps back.
pub fn leapfrog_reversibility_error<D: LogDensity + ?Sized>(density: &D, y: &[f64], rho: &[f64], eps: f64, steps: usize) -> f64 {
    let inv_mass = vec![1.0; y.len()];
    let mut point = PhasePoint::at(density, y.to_vec());
    point.momentum = rho.to_vec();
    if leapfrog(density, &mut point, eps, steps, &inv_mass).is_err() {
        return f64::INFINITY;
    }
    point.momentum.iter_mut().for_each(|p| *p = -*p);
    if leapfrog(density, &mut point, eps, steps, &inv_mass).is_err() {
        return f64::INFINITY;
    }
    let dy = y.iter().zip(&point.position).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let dp = rho.iter().zip(&point.momentum).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
    dy.max(dp)
}

/// Determinant of the numerical Jacobian of one leapfrog step in `(y, ρ)`.
pub fn leapfrog_jacobian_determinant<D: LogDensity + ?Sized>(density: &D, y: &[f64], rho: &[f64], eps: f64) -> f64 {
    let d = y.len();
    let inv_mass = vec![1.0; d];
    let map = |z: &[f64]| -> Vec<f64> {
        let mut point = PhasePoint::at(density, z[..d].to_vec());
        point.momentum = z[d..].to_vec();
        let _ = leapfrog(density, &mut point, eps, 1, &inv_mass);
        point.position.into_iter().chain(point.momentum).collect()
    };
    let z: Vec<f64> = y.iter().chain(rho).copied().collect();
    let mut jac = DMatrix::zeros(2 * d, 2 * d);
    let mut probe = z.clone();
    for j in 0..2 * d {
        let h = 1e-6 * (1.0 + z[j].abs());
        probe[j] = z[j] + h;
        let up = map(&probe);
        probe[j] = z[j] - h;
        let down = map(&probe);
        probe[j] = z[j];
        for i in 0..2 * d {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac.determinant()
}

/// `|ΔH(ε)| / |ΔH(ε/2)|` over the same integration time `ε·steps`.
pub fn energy_error_ratio<D: LogDensity + ?Sized>(density: &D, y: &[f64], rho: &[f64], eps: f64, steps: usize) -> f64 {
    let inv_mass = vec![1.0; y.len()];
    let delta = |e: f64, l: usize| {
        let mut point = PhasePoint::at(density, y.to_vec());
        point.momentum = rho.to_vec();
        let h0 = point.hamiltonian(&inv_mass);
        let _ = leapfrog(density, &mut point, e, l, &inv_mass);
        (point.hamiltonian(&inv_mass) - h0).abs()
    };
    delta(eps, steps) / delta(eps / 2.0, 2 * steps)
}

/// Exact expectation, under the extended target on a finite state space, of
/// the self-normalized weighted estimate of `f`, minus `E_π[f]`.
///
/// States carry potentials `φ` (target) and `δ` (instrumental); all `Kᴺ`
/// pseudo-sample configurations are enumerated.
pub fn enumerated_estimator_bias(potentials: &[f64], deltas: &[f64], f: &[f64], num_pseudo: usize) -> f64 {
    let k = potentials.len();
    let total = k.pow(num_pseudo as u32);
    let mut log_masses = Vec::with_capacity(total);
    let mut estimates = Vec::with_capacity(total);
    let mut index = vec![0usize; num_pseudo];
    for code in 0..total {
        let mut c = code;
        for slot in index.iter_mut() {
            *slot = c % k;
            c /= k;
        }
        let phis: Vec<f64> = index.iter().map(|s| potentials[*s]).collect();
        let dels: Vec<f64> = index.iter().map(|s| deltas[*s]).collect();
        // Discrete instrumental pmf ∝ exp{−δ}; the extended pmf carries the
        // same dropped constants for every configuration.
        log_masses.push(plain_extended_log_density(&phis, &dels));
        let log_w: Vec<f64> = phis.iter().zip(&dels).map(|(p, d)| plain_log_weight(*p, *d)).collect();
        let w = self_normalize(&log_w).expect("finite weights");
        estimates.push(index.iter().zip(&w).map(|(s, wi)| wi * f[*s]).sum::<f64>());
    }
    let masses = self_normalize(&log_masses).expect("finite masses");
    let expected: f64 = masses.iter().zip(&estimates).map(|(m, e)| m * e).sum();
    let gamma: Vec<f64> = potentials.iter().map(|p| -p).collect();
    let pi = self_normalize(&gamma).expect("finite target");
    let truth: f64 = pi.iter().zip(f).map(|(p, v)| p * v).sum();
    expected - truth
}

/// The invariant suite run by `pseudoext check`.
pub fn invariant_suite(seed: u64) -> Vec<CheckOutcome> {
    let mut out = gradient_suite(50, seed);
    let mut rng = stream_rng(seed, 1);

    let gaussian = posterior(GaussianTarget::standard(1));
    let mixture = posterior(build_mixture_target(MixtureSpec::scenario_a()).unwrap());
    let mut reversibility = 0.0f64;
    let mut volume = 0.0f64;
    for _ in 0..20 {
        let y = [10.0 * rng.random::<f64>(), 10.0 * rng.random::<f64>()];
        let rho = [rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)];
        reversibility = reversibility.max(leapfrog_reversibility_error(&mixture, &y, &rho, 0.01, 25));
        volume = volume.max((leapfrog_jacobian_determinant(&mixture, &y, &rho, 0.01) - 1.0).abs());
    }
    out.push(CheckOutcome {
        name: "leapfrog reversibility".into(),
        value: reversibility,
        tolerance: "<= 1e-10".into(),
        passed: reversibility <= 1e-10,
    });
    out.push(CheckOutcome {
        name: "leapfrog volume |det J - 1|".into(),
        value: volume,
        tolerance: "<= 1e-6".into(),
        passed: volume <= 1e-6,
    });
    let ratio = energy_error_ratio(&gaussian, &[1.0], &[0.5], 0.1, 10);
    out.push(CheckOutcome {
        name: "leapfrog energy error ratio".into(),
        value: ratio,
        tolerance: "in [3, 5]".into(),
        passed: (3.0..=5.0).contains(&ratio),
    });

    let mut worst = 0.0f64;
    for _ in 0..10 {
        let phis: Vec<f64> = (0..5).map(|_| 3.0 * rng.random::<f64>()).collect();
        let deltas: Vec<f64> = (0..5).map(|_| 3.0 * rng.random::<f64>()).collect();
        let f: Vec<f64> = (0..5).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        worst = worst.max(enumerated_estimator_bias(&phis, &deltas, &f, 2).abs());
    }
    out.push(CheckOutcome {
        name: "weighted estimator exact on 5 states, N=2".into(),
        value: worst,
        tolerance: "<= 1e-10".into(),
        passed: worst <= 1e-10,
    });
    out
}
