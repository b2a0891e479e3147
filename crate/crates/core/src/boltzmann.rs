//! Boltzmann machine relaxations built with the Gaussian integral trick.
//!
//! A Boltzmann machine `P(s) ∝ exp{½ sᵀWs + sᵀb}` on `s ∈ {-1, 1}^{d_b}` is
//! relaxed to the continuous density
//! `π(x) ∝ exp{-½ xᵀx} Π_k cosh(q_kᵀx + b_k)` on `R^d`, where the rows `q_k`
//! of `Q` satisfy `QQᵀ = W + D` for a diagonal shift `D`. For small `d_b` the
//! discrete model can be enumerated, which gives exact moments of the
//! relaxation through `E[X] = QᵀE[S]` and `E[XXᵀ] = QᵀE[SSᵀ]Q + I`.

use crate::error::{Error, Result};
use crate::math::log_cosh;
use crate::rng::stream_rng;
use crate::targets::TargetDensity;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Slack added to the eigen-shift so that `W + D` is PSD after rounding.
pub const SHIFT_EPSILON: f64 = 1e-8;
/// Largest `d_b` accepted by [`enumerate_exact`] and [`exact_sampler`].
pub const MAX_ENUMERABLE_SPINS: usize = 22;
/// Eigenvalues of `W + D` at or below this are dropped when building `Q`.
const RANK_CUTOFF: f64 = 2.0 * SHIFT_EPSILON;
const CHUNK_BITS: usize = 6;

/// Diagonal shift `D` and the spectrum bounds it achieves on `W + D`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagonalShift {
    pub values: Vec<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Uniform eigen-shift `D = (ε - λ_min(W))·I`.
pub fn choose_diagonal(w: &[Vec<f64>]) -> DiagonalShift {
    let n = w.len();
    let eig = SymmetricEigen::new(to_matrix(w));
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = SHIFT_EPSILON - lambda_min;
    let shift = if n == 0 { 0.0 } else { shift };
    log::debug!("diagonal shift {shift:.6e}; max eigenvalue of W + D = {:.6}", lambda_max + shift);
    DiagonalShift {
        values: vec![shift; n],
        min_eigenvalue: lambda_min + shift,
        max_eigenvalue: lambda_max + shift,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoltzmannRelaxation {
    /// Symmetric coupling matrix with zero diagonal, row-major.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Diagonal of `D`.
    pub diagonal: Vec<f64>,
    /// `d_b × d` factor with `QQᵀ ≈ W + D`, row-major (row `k` is `q_k`).
    pub factor: Vec<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub lambda1: Option<f64>,
    #[serde(default)]
    pub lambda2: Option<f64>,
}

impl BoltzmannRelaxation {
    /// Assembles and validates a relaxation from explicit parts.
    pub fn from_parts(
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        diagonal: Vec<f64>,
        factor: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let relax = Self { weights, bias, diagonal, factor, seed: None, lambda1: None, lambda2: None };
        relax.validate()?;
        Ok(relax)
    }

    pub fn num_spins(&self) -> usize {
        self.bias.len()
    }

    /// Dimension `d` of the relaxed space.
    pub fn dim(&self) -> usize {
        self.factor.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.bias.len();
        if n == 0 {
            return Err(Error::InvalidSpec("relaxation needs at least one spin".into()));
        }
        if self.weights.len() != n || self.weights.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSpec("W must be d_b × d_b".into()));
        }
        if self.diagonal.len() != n || self.factor.len() != n {
            return Err(Error::InvalidSpec("D and Q must have d_b rows".into()));
        }
        let d = self.dim();
        if d == 0 || self.factor.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidSpec("Q rows must share a positive width".into()));
        }
        for i in 0..n {
            if self.weights[i][i] != 0.0 {
                return Err(Error::InvalidSpec(format!("W[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if (self.weights[i][j] - self.weights[j][i]).abs() > 1e-12 {
                    return Err(Error::InvalidSpec("W must be symmetric".into()));
                }
            }
        }
        let shifted = self.shifted_weights();
        let eig = SymmetricEigen::new(to_matrix(&shifted));
        let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if lambda_min < -1e-10 {
            return Err(Error::InvalidSpec(format!("W + D is not PSD (λ_min = {lambda_min:e})")));
        }
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let qq: f64 = self.factor[i].iter().zip(&self.factor[j]).map(|(a, b)| a * b).sum();
                worst = worst.max((qq - shifted[i][j]).abs());
            }
        }
        if worst > SHIFT_EPSILON + 1e-12 {
            return Err(Error::InvalidSpec(format!("‖QQᵀ − (W + D)‖_max = {worst:e}")));
        }
        Ok(())
    }

    /// `W + D`.
    pub fn shifted_weights(&self) -> Vec<Vec<f64>> {
        let mut m = self.weights.clone();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += self.diagonal[i];
        }
        m
    }

    /// `log Z` of the relaxation given `log Z_b` of the discrete machine.
    pub fn relaxation_log_normalizer(&self, log_zb: f64) -> f64 {
        let trace: f64 = self.diagonal.iter().sum();
        log_zb + 0.5 * trace + 0.5 * self.dim() as f64 * (2.0 * PI).ln()
            - self.num_spins() as f64 * LN_2
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let relax: Self = serde_json::from_str(text)?;
        relax.validate()?;
        Ok(relax)
    }

    fn energy(&self, s: &[f64]) -> f64 {
        let mut e = 0.0;
        for (i, si) in s.iter().enumerate() {
            let h: f64 = self.weights[i].iter().zip(s).map(|(w, sj)| w * sj).sum();
            e += 0.5 * si * h + si * self.bias[i];
        }
        e
    }
}

/// Draws a random relaxation: `b_i ~ N(0, 0.1²)`, `W = R diag(e) Rᵀ` with a
/// Haar-random orthogonal `R` and `e_i = λ₁ tanh(λ₂ η_i)`, then zeroes the
/// diagonal of `W`, shifts it to PSD and factors it.
pub fn generate_relaxation(seed: u64, num_spins: usize, lambda1: f64, lambda2: f64) -> Result<BoltzmannRelaxation> {
    if num_spins < 2 {
        return Err(Error::InvalidSpec(format!("d_b must be at least 2, got {num_spins}")));
    }
    let n = num_spins;
    let mut rng = stream_rng(seed, 0);
    let bias: Vec<f64> = (0..n).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
    let eigenvalues: Vec<f64> = (0..n)
        .map(|_| lambda1 * (lambda2 * rng.sample::<f64, _>(StandardNormal)).tanh())
        .collect();
    let rotation = haar_orthogonal(n, &mut rng);

    let mut weights = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..n).map(|k| rotation[(i, k)] * eigenvalues[k] * rotation[(j, k)]).sum();
            weights[i][j] = if i == j { 0.0 } else { v };
            weights[j][i] = weights[i][j];
        }
    }

    let shift = choose_diagonal(&weights);
    let factor = factor_shifted(&weights, &shift.values);
    log::info!(
        "relaxation d_b={n}, d={}, max eigenvalue of W + D {:.4}",
        factor.first().map_or(0, Vec::len),
        shift.max_eigenvalue
    );
    let relax = BoltzmannRelaxation {
        weights,
        bias,
        diagonal: shift.values,
        factor,
        seed: Some(seed),
        lambda1: Some(lambda1),
        lambda2: Some(lambda2),
    };
    relax.validate()?;
    Ok(relax)
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let gaussian = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gaussian.qr();
    let mut q = qr.q();
    let r = qr.r();
    // sign correction makes the distribution exactly Haar
    for k in 0..n {
        if r[(k, k)] < 0.0 {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// `Q` from the eigenpairs of `W + D` above the rank cutoff (all of them if
/// none clear it, which only happens for `W ≈ 0`).
fn factor_shifted(weights: &[Vec<f64>], diagonal: &[f64]) -> Vec<Vec<f64>> {
    let n = weights.len();
    let mut shifted = weights.to_vec();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] += diagonal[i];
    }
    let eig = SymmetricEigen::new(to_matrix(&shifted));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut kept: Vec<usize> = order.iter().copied().filter(|&k| eig.eigenvalues[k] > RANK_CUTOFF).collect();
    if kept.is_empty() {
        kept = order;
    }
    (0..n)
        .map(|i| {
            kept.iter()
                .map(|&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].max(0.0).sqrt())
                .collect()
        })
        .collect()
}

/// Relaxation potential `φ(x) = ½xᵀx − Σ_k log cosh(q_kᵀx + b_k)`.
#[derive(Debug, Clone)]
pub struct RelaxationTarget {
    factor: Vec<Vec<f64>>,
    bias: Vec<f64>,
    dim: usize,
}

pub fn relaxation_target(relax: &BoltzmannRelaxation) -> RelaxationTarget {
    RelaxationTarget { factor: relax.factor.clone(), bias: relax.bias.clone(), dim: relax.dim() }
}

impl TargetDensity for RelaxationTarget {
    fn dim(&self) -> usize {
        self.dim
    }

    fn label(&self) -> &str {
        "boltzmann-relaxation"
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let mut phi = 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        for (q, b) in self.factor.iter().zip(&self.bias) {
            let a: f64 = q.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b;
            phi -= log_cosh(a);
        }
        phi
    }

    fn potential_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.copy_from_slice(x);
        let mut phi = 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        for (q, b) in self.factor.iter().zip(&self.bias) {
            let a: f64 = q.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b;
            phi -= log_cosh(a);
            let t = a.tanh();
            for (g, qk) in grad.iter_mut().zip(q) {
                *g -= t * qk;
            }
        }
        phi
    }
}

/// Exact quantities obtained by enumerating every spin configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactMoments {
    pub log_zb: f64,
    /// `log Z` of the relaxation density `exp{-φ}`.
    pub log_z: f64,
    pub mean_s: Vec<f64>,
    pub second_s: Vec<Vec<f64>>,
    pub cov_s: Vec<Vec<f64>>,
    pub mean_x: Vec<f64>,
    pub second_x: Vec<Vec<f64>>,
}

impl ExactMoments {
    pub fn second_x_diagonal(&self) -> Vec<f64> {
        (0..self.second_x.len()).map(|i| self.second_x[i][i]).collect()
    }
}

fn check_enumerable(relax: &BoltzmannRelaxation) -> Result<()> {
    let n = relax.num_spins();
    if n > MAX_ENUMERABLE_SPINS {
        return Err(Error::Infeasible(format!(
            "enumerating 2^{n} spin states exceeds the d_b <= {MAX_ENUMERABLE_SPINS} limit"
        )));
    }
    Ok(())
}

fn spins_from_index(index: usize, n: usize, s: &mut [f64]) {
    for (i, si) in s.iter_mut().enumerate().take(n) {
        *si = if index >> i & 1 == 1 { 1.0 } else { -1.0 };
    }
}

struct ChunkSums {
    log_max: f64,
    total: f64,
    first: Vec<f64>,
    second: Vec<f64>, // upper triangle, row-major
}

/// Walks the states of one chunk in Gray-code order, calling `visit(index, energy, spins)`.
fn walk_chunk(relax: &BoltzmannRelaxation, chunk: usize, low_bits: usize, mut visit: impl FnMut(usize, f64, &[f64])) {
    let n = relax.num_spins();
    let mut s = vec![0.0; n];
    let base = chunk << low_bits;
    spins_from_index(base, n, &mut s);
    let mut energy = relax.energy(&s);
    let mut field: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| relax.weights[i][j] * s[j]).sum())
        .collect();
    let mut index = base;
    visit(index, energy, &s);
    for step in 1..(1usize << low_bits) {
        let k = step.trailing_zeros() as usize;
        let old = s[k];
        energy += -2.0 * old * (field[k] + relax.bias[k]);
        s[k] = -old;
        for (j, f) in field.iter_mut().enumerate() {
            if j != k {
                *f -= 2.0 * relax.weights[j][k] * old;
            }
        }
        index ^= 1 << k;
        visit(index, energy, &s);
    }
}

fn chunk_layout(n: usize) -> (usize, usize) {
    let chunk_bits = n.min(CHUNK_BITS);
    (1 << chunk_bits, n - chunk_bits)
}

/// Exact `log Z_b`, spin moments and the implied relaxation moments.
pub fn enumerate_exact(relax: &BoltzmannRelaxation) -> Result<ExactMoments> {
    check_enumerable(relax)?;
    let n = relax.num_spins();
    let tri = n * (n + 1) / 2;
    let (chunks, low_bits) = chunk_layout(n);
    let partials: Vec<ChunkSums> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = ChunkSums {
                log_max: f64::NEG_INFINITY,
                total: 0.0,
                first: vec![0.0; n],
                second: vec![0.0; tri],
            };
            walk_chunk(relax, chunk, low_bits, |_, energy, s| {
                if energy > acc.log_max {
                    let scale = (acc.log_max - energy).exp();
                    acc.total *= scale;
                    acc.first.iter_mut().for_each(|v| *v *= scale);
                    acc.second.iter_mut().for_each(|v| *v *= scale);
                    acc.log_max = energy;
                }
                let p = (energy - acc.log_max).exp();
                acc.total += p;
                let mut t = 0;
                for i in 0..n {
                    let ps = p * s[i];
                    acc.first[i] += ps;
                    for sj in &s[i..] {
                        acc.second[t] += ps * sj;
                        t += 1;
                    }
                }
            });
            acc
        })
        .collect();

    // deterministic reduction in chunk order
    let log_max = partials.iter().map(|c| c.log_max).fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    let mut first = vec![0.0; n];
    let mut second = vec![0.0; tri];
    for c in &partials {
        let scale = (c.log_max - log_max).exp();
        total += c.total * scale;
        first.iter_mut().zip(&c.first).for_each(|(a, b)| *a += b * scale);
        second.iter_mut().zip(&c.second).for_each(|(a, b)| *a += b * scale);
    }
    let log_zb = log_max + total.ln();
    let mean_s: Vec<f64> = first.iter().map(|v| v / total).collect();
    let mut second_s = vec![vec![0.0; n]; n];
    let mut t = 0;
    for i in 0..n {
        for j in i..n {
            second_s[i][j] = second[t] / total;
            second_s[j][i] = second_s[i][j];
            t += 1;
        }
    }
    let cov_s: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| second_s[i][j] - mean_s[i] * mean_s[j]).collect())
        .collect();

    let d = relax.dim();
    let q = &relax.factor;
    let mean_x: Vec<f64> = (0..d).map(|a| (0..n).map(|k| q[k][a] * mean_s[k]).sum()).collect();
    // Qᵀ E[SSᵀ] Q + I
    let sq: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..d).map(|b| (0..n).map(|k| second_s[i][k] * q[k][b]).sum()).collect())
        .collect();
    let second_x: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    let v: f64 = (0..n).map(|i| q[i][a] * sq[i][b]).sum();
                    v + if a == b { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect();

    Ok(ExactMoments {
        log_zb,
        log_z: relax.relaxation_log_normalizer(log_zb),
        mean_s,
        second_s,
        cov_s,
        mean_x,
        second_x,
    })
}

/// Exact probabilities `P(s)` indexed by the bit pattern of `s` (bit `i` set ⇔ `s_i = +1`).
pub fn state_probabilities(relax: &BoltzmannRelaxation) -> Result<Vec<f64>> {
    check_enumerable(relax)?;
    let n = relax.num_spins();
    let (chunks, low_bits) = chunk_layout(n);
    let mut log_p = vec![0.0; 1 << n];
    let per_chunk: Vec<Vec<(usize, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut out = Vec::with_capacity(1 << low_bits);
            walk_chunk(relax, chunk, low_bits, |idx, e, _| out.push((idx, e)));
            out
        })
        .collect();
    for (idx, e) in per_chunk.into_iter().flatten() {
        log_p[idx] = e;
    }
    let lse = crate::math::log_sum_exp(&log_p);
    Ok(log_p.into_iter().map(|l| (l - lse).exp()).collect())
}

/// Independent draws from the relaxation: `s ~ P(s)`, then `x | s ~ N(Qᵀs, I)`.
pub fn exact_sampler(relax: &BoltzmannRelaxation, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let probs = state_probabilities(relax)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let n = relax.num_spins();
    let d = relax.dim();
    let mut rng = stream_rng(seed, 0);
    let mut s = vec![0.0; n];
    let mut draws = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cumulative.partition_point(|c| *c <= u).min(probs.len() - 1);
        spins_from_index(idx, n, &mut s);
        let x: Vec<f64> = (0..d)
            .map(|a| {
                let mean: f64 = (0..n).map(|k| relax.factor[k][a] * s[k]).sum();
                mean + rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        draws.push(x);
    }
    Ok(draws)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manual(w12: f64, b: [f64; 2]) -> BoltzmannRelaxation {
        let weights = vec![vec![0.0, w12], vec![w12, 0.0]];
        let shift = choose_diagonal(&weights);
        let factor = factor_shifted(&weights, &shift.values);
        BoltzmannRelaxation::from_parts(weights, b.to_vec(), shift.values, factor).unwrap()
    }

    #[test]
    fn zero_coupling_shift_is_epsilon() {
        let shift = choose_diagonal(&vec![vec![0.0; 3]; 3]);
        for v in &shift.values {
            assert!((v - SHIFT_EPSILON).abs() < 1e-20);
        }
    }

    #[test]
    fn two_by_two_shift_matches_closed_form() {
        // eigenvalues of [[0,1],[1,0]] are ±1
        let shift = choose_diagonal(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((shift.values[0] - (1.0 + SHIFT_EPSILON)).abs() < 1e-14);
        assert!((shift.min_eigenvalue - SHIFT_EPSILON).abs() < 1e-14);
        assert!((shift.max_eigenvalue - (2.0 + SHIFT_EPSILON)).abs() < 1e-14);
    }

    #[test]
    fn random_shift_lands_in_zero_two_epsilon() {
        let mut rng = stream_rng(3, 0);
        let n = 10;
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let v: f64 = rng.sample(StandardNormal);
                w[i][j] = v;
                w[j][i] = v;
            }
        }
        let shift = choose_diagonal(&w);
        let shifted: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| w[i][j] + if i == j { shift.values[i] } else { 0.0 }).collect())
            .collect();
        let eig = SymmetricEigen::new(to_matrix(&shifted));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((0.0..=2.0 * SHIFT_EPSILON).contains(&min), "min eigenvalue {min:e}");
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = generate_relaxation(11, 8, 6.0, 2.0).unwrap();
        let b = generate_relaxation(11, 8, 6.0, 2.0).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
        assert_eq!(a.dim(), 7);
        let c = generate_relaxation(12, 8, 6.0, 2.0).unwrap();
        assert_ne!(a.weights, c.weights);
    }

    #[test]
    fn default_configuration_drops_one_dimension() {
        let relax = generate_relaxation(2018, 28, 6.0, 2.0).unwrap();
        assert_eq!(relax.num_spins(), 28);
        assert_eq!(relax.dim(), 27);
    }

    #[test]
    fn zero_lambda_decouples_spins() {
        let relax = generate_relaxation(5, 4, 0.0, 2.0).unwrap();
        assert!(relax.weights.iter().flatten().all(|w| *w == 0.0));
        assert_eq!(relax.dim(), 4);
    }

    #[test]
    fn zero_factor_is_standard_gaussian() {
        let relax = BoltzmannRelaxation::from_parts(
            vec![vec![0.0; 3]; 3],
            vec![0.0; 3],
            vec![0.0; 3],
            vec![vec![0.0; 2]; 3],
        )
        .unwrap();
        let t = relaxation_target(&relax);
        let x = [0.3, -1.1];
        let expected = 0.5 * (0.09 + 1.21) - 3.0 * log_cosh(0.0);
        assert!((t.potential(&x) - expected).abs() < 1e-14);
    }

    #[test]
    fn origin_is_stationary_without_bias() {
        let mut relax = generate_relaxation(4, 6, 6.0, 2.0).unwrap();
        relax.bias = vec![0.0; 6];
        let t = relaxation_target(&relax);
        assert!(t.gradient(&vec![0.0; relax.dim()]).iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn independent_fair_spins() {
        let relax = BoltzmannRelaxation::from_parts(
            vec![vec![0.0; 4]; 4],
            vec![0.0; 4],
            vec![0.0; 4],
            vec![vec![0.0; 4]; 4],
        )
        .unwrap();
        let m = enumerate_exact(&relax).unwrap();
        assert!((m.log_zb - 4.0 * LN_2).abs() < 1e-12);
        for i in 0..4 {
            assert!(m.mean_s[i].abs() < 1e-15);
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((m.second_s[i][j] - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn two_spin_correlation_is_tanh_of_coupling() {
        for w in [-1.3, 0.4, 2.0] {
            let relax = manual(w, [0.0, 0.0]);
            let m = enumerate_exact(&relax).unwrap();
            assert!((m.second_s[0][1] - f64::tanh(w)).abs() < 1e-12);
        }
    }

    #[test]
    fn gray_code_energies_match_direct_evaluation() {
        let relax = generate_relaxation(9, 9, 6.0, 2.0).unwrap();
        let probs = state_probabilities(&relax).unwrap();
        let mut s = vec![0.0; 9];
        let energies: Vec<f64> = (0..1 << 9)
            .map(|idx| {
                spins_from_index(idx, 9, &mut s);
                relax.energy(&s)
            })
            .collect();
        let lse = crate::math::log_sum_exp(&energies);
        for (p, e) in probs.iter().zip(&energies) {
            assert!((p - (e - lse).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_of_w_only_rescales_p() {
        // s_i² = 1, so a diagonal on W adds the same constant to every energy
        let relax = generate_relaxation(21, 6, 6.0, 2.0).unwrap();
        let probs = state_probabilities(&relax).unwrap();
        let mut with_diag = relax.clone();
        let mut s = vec![0.0; 6];
        for i in 0..6 {
            with_diag.weights[i][i] = 0.7 * (i as f64 + 1.0);
        }
        let energies: Vec<f64> = (0..1 << 6)
            .map(|idx| {
                spins_from_index(idx, 6, &mut s);
                with_diag.energy(&s)
            })
            .collect();
        let lse = crate::math::log_sum_exp(&energies);
        for (p, e) in probs.iter().zip(&energies) {
            assert!((p - (e - lse).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let n = MAX_ENUMERABLE_SPINS + 1;
        let relax = BoltzmannRelaxation {
            weights: vec![vec![0.0; n]; n],
            bias: vec![0.0; n],
            diagonal: vec![0.0; n],
            factor: vec![vec![0.0; 1]; n],
            seed: None,
            lambda1: None,
            lambda2: None,
        };
        assert!(matches!(enumerate_exact(&relax), Err(Error::Infeasible(_))));
        assert!(matches!(exact_sampler(&relax, 3, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn empty_draw_request() {
        let relax = generate_relaxation(1, 4, 6.0, 2.0).unwrap();
        assert!(exact_sampler(&relax, 0, 0).unwrap().is_empty());
    }

    #[test]
    fn json_round_trip() {
        let relax = generate_relaxation(1, 5, 6.0, 2.0).unwrap();
        let back = BoltzmannRelaxation::from_json(&relax.to_json().unwrap()).unwrap();
        assert_eq!(back.weights, relax.weights);
        assert_eq!(back.factor, relax.factor);
        assert_eq!(back.seed, Some(1));
    }
}
