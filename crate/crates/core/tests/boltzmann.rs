use pseudoext_core::boltzmann::{enumerate_exact, exact_sampler, generate_relaxation, relaxation_target, state_probabilities};
use pseudoext_core::checks::{gradient_error, GRADIENT_TOLERANCE};
use pseudoext_core::hmc::posterior;
use pseudoext_core::rng::stream_rng;
use rand::Rng;

#[test]
fn exact_sampler_agrees_with_enumeration() {
    let relax = generate_relaxation(4, 10, 6.0, 2.0).unwrap();
    let exact = enumerate_exact(&relax).unwrap();
    let draws = exact_sampler(&relax, 20_000, 9).unwrap();
    let n = draws.len() as f64;
    let d = exact.mean_x.len();
    for k in 0..d {
        let m = draws.iter().map(|x| x[k]).sum::<f64>() / n;
        let var = exact.second_x[k][k] - exact.mean_x[k].powi(2);
        let se = (var / n).sqrt();
        assert!((m - exact.mean_x[k]).abs() < 3.0 * se, "coordinate {k}: {m} vs {}", exact.mean_x[k]);
        let m2 = draws.iter().map(|x| x[k] * x[k]).sum::<f64>() / n;
        let sd2 = draws.iter().map(|x| (x[k] * x[k] - m2).powi(2)).sum::<f64>() / n;
        assert!((m2 - exact.second_x[k][k]).abs() < 3.0 * (sd2 / n).sqrt());
    }
}

#[test]
fn state_probabilities_sum_to_one() {
    let relax = generate_relaxation(2, 8, 6.0, 2.0).unwrap();
    let p = state_probabilities(&relax).unwrap();
    assert_eq!(p.len(), 256);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn relaxation_gradient_matches_finite_differences() {
    let relax = generate_relaxation(7, 10, 6.0, 2.0).unwrap();
    let target = posterior(relaxation_target(&relax));
    let mut rng = stream_rng(1, 0);
    let pts: Vec<Vec<f64>> = (0..30).map(|_| (0..9).map(|_| rng.random_range(-4.0..4.0)).collect()).collect();
    assert!(gradient_error(&target, &pts) <= GRADIENT_TOLERANCE);
}

#[test]
fn instances_are_reproducible_from_their_seed() {
    let a = generate_relaxation(3, 10, 6.0, 2.0).unwrap();
    let b = generate_relaxation(3, 10, 6.0, 2.0).unwrap();
    assert_eq!(enumerate_exact(&a).unwrap().mean_x, enumerate_exact(&b).unwrap().mean_x);
}
