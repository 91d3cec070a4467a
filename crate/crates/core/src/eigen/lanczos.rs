//! Shift-invert Lanczos for the lowest positive eigenpair.
//!
//! The operator `(K - sigma M)^-1 M` is self-adjoint in the M inner product;
//! its largest eigenvalue `theta` corresponds to the pencil eigenvalue
//! `sigma + 1 / theta` nearest above `sigma`. Shifts are validated with the
//! inertia of the `L D L^T` factor of `K - sigma M`.

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_pencil, finish, relative_residual, EigenConfig, EigenResult, Method};
use crate::error::{Error, Result};
use crate::sparse::{dot, LdlFactor, LdlSymbolic, SparseSymMatrix};

const MAX_BASIS: usize = 48;
const SEED: u64 = 0x5eed_1a9c;
const BREAKDOWN_RETRIES: usize = 8;

struct ShiftedOperator<'a> {
    m: &'a SparseSymMatrix,
    factor: LdlFactor,
    /// M-normalized vectors projected out after every application.
    deflation: Vec<(Vec<f64>, Vec<f64>)>,
}

impl ShiftedOperator<'_> {
    fn project(&self, x: &mut [f64]) {
        for (z, mz) in &self.deflation {
            let c = dot(x, mz);
            x.iter_mut().zip(z).for_each(|(a, b)| *a -= c * b);
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.m.mul_vec(x);
        self.factor.solve_in_place(&mut y);
        self.project(&mut y);
        y
    }
}

struct Shifted {
    shift: f64,
    factor: LdlFactor,
}

/// Factors `K - sigma M`, nudging sigma upward when the factorization breaks down.
fn factor_shifted(
    symbolic: &LdlSymbolic,
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    mut shift: f64,
) -> Result<Shifted> {
    let mut last = None;
    for _ in 0..BREAKDOWN_RETRIES {
        let a = SparseSymMatrix::linear_combination(1.0, k, -shift, m)?;
        match symbolic.factor(&a) {
            Ok(factor) => return Ok(Shifted { shift, factor }),
            Err(Error::FactorizationBreakdown { pivot, .. }) => {
                last = Some(Error::FactorizationBreakdown { pivot, shift });
                shift = if shift == 0.0 { 1e-12 } else { shift * (1.0 + 1e-3) };
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn random_start(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

struct LanczosOutcome {
    theta: f64,
    vector: Vec<f64>,
    iterations: usize,
}

/// Largest eigenpair of the M-self-adjoint operator by restarted Lanczos with
/// full reorthogonalization. `accept(theta, v)` returns the residual to test
/// against `tol`.
fn largest_ritz_pair(
    op: &ShiftedOperator<'_>,
    start: Vec<f64>,
    cfg: &EigenConfig,
    accept: impl Fn(f64, &[f64]) -> f64,
) -> Result<LanczosOutcome> {
    let m = op.m;
    let n = m.n();
    let basis_cap = MAX_BASIS.min(n.saturating_sub(op.deflation.len()).max(1));
    let mut iterations = 0;
    let mut start = start;
    let mut best_residual = f64::INFINITY;
    loop {
        op.project(&mut start);
        let norm = dot(&start, &m.mul_vec(&start)).sqrt();
        if !(norm > 0.0) {
            return Err(Error::NotConverged {
                iterations,
                residual: best_residual,
                context: "Lanczos start vector lies in the deflated space".into(),
            });
        }
        let mut q: Vec<Vec<f64>> = vec![start.iter().map(|x| x / norm).collect()];
        let mut mq: Vec<Vec<f64>> = vec![m.mul_vec(&q[0])];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut ritz: (f64, Vec<f64>) = (0.0, q[0].clone());
        for j in 0..basis_cap {
            let mut w = op.apply(&q[j]);
            iterations += 1;
            alpha.push(dot(&w, &mq[j]));
            for _ in 0..2 {
                for (qi, mqi) in q.iter().zip(&mq) {
                    let c = dot(&w, mqi);
                    w.iter_mut().zip(qi).for_each(|(a, b)| *a -= c * b);
                }
            }
            let mw = m.mul_vec(&w);
            let b = dot(&w, &mw).max(0.0).sqrt();

            let size = j + 1;
            let t = Mat::<f64>::from_fn(size, size, |r, c| {
                if r == c {
                    alpha[r]
                } else if r == c + 1 {
                    beta[c]
                } else if c == r + 1 {
                    beta[r]
                } else {
                    0.0
                }
            });
            let evd = t
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Dense(format!("tridiagonal eigensolver: {e:?}")))?;
            let theta = evd.S().column_vector()[size - 1];
            let s: Vec<f64> = (0..size).map(|r| evd.U()[(r, size - 1)]).collect();
            let mut v = vec![0.0; n];
            for (qi, &si) in q.iter().zip(&s) {
                v.iter_mut().zip(qi).for_each(|(a, x)| *a += si * x);
            }
            let residual = accept(theta, &v);
            best_residual = best_residual.min(residual);
            if residual <= cfg.tol {
                return Ok(LanczosOutcome {
                    theta,
                    vector: v,
                    iterations,
                });
            }
            ritz = (theta, v);
            if iterations >= cfg.max_iter {
                return Err(Error::NotConverged {
                    iterations,
                    residual: best_residual,
                    context: "shift-invert Lanczos".into(),
                });
            }
            if b <= 1e-13 * theta.abs() || size == basis_cap {
                break;
            }
            beta.push(b);
            q.push(w.iter().map(|x| x / b).collect());
            mq.push(mw.iter().map(|x| x / b).collect());
        }
        start = ritz.1;
    }
}

/// Smallest positive eigenvalue by shift-invert Lanczos around `shift_guess`.
///
/// The kernel dimension is the number of negative pivots of `K - eps M` for a
/// tiny `eps`. The shift is lowered from `shift_guess` until `K - sigma M`
/// has no further negative pivots, so that the eigenvalue found is the
/// smallest positive one.
pub fn smallest_positive_shift_invert(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    shift_guess: f64,
    kernel_dim_hint: Option<usize>,
    cfg: &EigenConfig,
) -> Result<EigenResult> {
    check_pencil(k, m)?;
    if !(shift_guess > 0.0) || !shift_guess.is_finite() {
        return Err(Error::DimensionMismatch(format!("shift guess must be positive, got {shift_guess}")));
    }
    let pattern = SparseSymMatrix::linear_combination(1.0, k, 1.0, m)?;
    let symbolic = LdlSymbolic::analyze(&pattern);
    let floor = 1e-6 * shift_guess;
    let kernel_dim = match kernel_dim_hint {
        Some(0) => 0,
        _ => factor_shifted(&symbolic, k, m, floor)?.factor.inertia().negative,
    };
    if kernel_dim == k.n() {
        return Err(Error::NoPositiveEigenvalue);
    }

    let mut shift = shift_guess;
    let shifted = loop {
        let s = factor_shifted(&symbolic, k, m, shift)?;
        if s.factor.inertia().negative <= kernel_dim {
            break s;
        }
        shift = floor + 0.5 * (s.shift - floor);
        if shift <= 2.0 * floor {
            return Err(Error::NoPositiveEigenvalue);
        }
    };
    let sigma = shifted.shift;
    let op = ShiftedOperator {
        m,
        factor: shifted.factor,
        deflation: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = op.apply(&random_start(k.n(), &mut rng));
    let out = largest_ritz_pair(&op, start, cfg, |theta, v| {
        if theta <= 0.0 {
            f64::INFINITY
        } else {
            relative_residual(k, m, sigma + 1.0 / theta, v)
        }
    })?;
    let lambda_sq = sigma + 1.0 / out.theta;
    if lambda_sq <= 10.0 * cfg.tol {
        return Err(Error::NoPositiveEigenvalue);
    }
    let mut res = finish(k, m, lambda_sq, out.vector, kernel_dim, Method::ShiftInvert, out.iterations)?;
    res.shift = Some(sigma);
    Ok(res)
}

/// Smallest positive eigenvalue of a pencil whose kernel is known to be
/// trivial (`kernel_dim = 0`) or spanned by the constant vector
/// (`kernel_dim = 1`). The constants are deflated M-orthogonally and
/// Lanczos runs on `(K + delta M)^-1 M` for a small `delta > 0`.
pub fn smallest_positive_lowest_k(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    kernel_dim: usize,
    cfg: &EigenConfig,
) -> Result<EigenResult> {
    check_pencil(k, m)?;
    if kernel_dim > 1 {
        return Err(Error::DimensionMismatch(format!(
            "lowest-k solves support kernel dimension 0 or 1, got {kernel_dim}"
        )));
    }
    let n = k.n();
    if kernel_dim >= n {
        return Err(Error::NoPositiveEigenvalue);
    }
    // Rayleigh quotients of unit vectors bound the spectrum from above.
    let min_ratio = (0..n)
        .map(|i| k.get(i, i) / m.get(i, i))
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !min_ratio.is_finite() {
        return Err(Error::NoPositiveEigenvalue);
    }
    let pattern = SparseSymMatrix::linear_combination(1.0, k, 1.0, m)?;
    let symbolic = LdlSymbolic::analyze(&pattern);
    let shifted = factor_shifted(&symbolic, k, m, -1e-3 * min_ratio)?;
    let sigma = shifted.shift;
    let mut deflation = Vec::new();
    if kernel_dim == 1 {
        let ones = vec![1.0; n];
        let m1 = m.mul_vec(&ones);
        let norm = dot(&ones, &m1).sqrt();
        deflation.push((ones.iter().map(|x| x / norm).collect(), m1.iter().map(|x| x / norm).collect()));
    }
    let op = ShiftedOperator {
        m,
        factor: shifted.factor,
        deflation,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = op.apply(&random_start(n, &mut rng));
    let out = largest_ritz_pair(&op, start, cfg, |theta, v| {
        if theta <= 0.0 {
            f64::INFINITY
        } else {
            relative_residual(k, m, sigma + 1.0 / theta, v)
        }
    })?;
    let lambda_sq = sigma + 1.0 / out.theta;
    let mut v = out.vector;
    op.project(&mut v);
    let mut res = finish(k, m, lambda_sq, v, kernel_dim, Method::LowestK, out.iterations)?;
    res.shift = Some(sigma);
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::smallest_positive_dense;

    fn random_spd(n: usize, seed: u64, diag: f64) -> SparseSymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, diag + rng.gen_range(0.0..1.0)));
            for j in 0..i {
                if rng.gen_bool(0.15) {
                    t.push((i, j, rng.gen_range(-0.3..0.3)));
                }
            }
        }
        SparseSymMatrix::from_lower_triplets(n, &t)
    }

    #[test]
    fn diagonal_example() {
        let k = SparseSymMatrix::diagonal(&[0.0, 0.0, 3.0]);
        let m = SparseSymMatrix::identity(3);
        let r = smallest_positive_shift_invert(&k, &m, 2.0, None, &EigenConfig::default()).unwrap();
        assert!((r.lambda_sq - 3.0).abs() < 1e-12);
        assert_eq!(r.kernel_dim, 2);
    }

    #[test]
    fn random_pencil_matches_dense() {
        let n = 50;
        let k = random_spd(n, 7, 4.0);
        let m = random_spd(n, 11, 3.0);
        let cfg = EigenConfig::default();
        let d = smallest_positive_dense(&k, &m, &cfg).unwrap();
        for guess in [0.5 * d.lambda_sq, 1.1 * d.lambda_sq, 3.0 * d.lambda_sq] {
            let s = smallest_positive_shift_invert(&k, &m, guess, None, &cfg).unwrap();
            assert!((s.lambda_sq - d.lambda_sq).abs() < 1e-10 * d.lambda_sq, "guess {guess}");
            assert!(s.residual_norm <= cfg.tol);
        }
        let l = smallest_positive_lowest_k(&k, &m, 0, &cfg).unwrap();
        assert!((l.lambda_sq - d.lambda_sq).abs() < 1e-10 * d.lambda_sq);
    }

    #[test]
    fn lowest_k_deflates_constants() {
        // weighted path Laplacian: kernel = constants
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n - 1 {
            let w = 1.0 + 0.5 * ((i * 7 % 5) as f64);
            t.push((i, i, w));
            t.push((i + 1, i + 1, w));
            t.push((i + 1, i, -w));
        }
        let k = SparseSymMatrix::from_lower_triplets(n, &t);
        let m = random_spd(n, 3, 2.0);
        let cfg = EigenConfig::default();
        let d = smallest_positive_dense(&k, &m, &cfg).unwrap();
        let l = smallest_positive_lowest_k(&k, &m, 1, &cfg).unwrap();
        assert!((l.lambda_sq - d.lambda_sq).abs() < 1e-10 * d.lambda_sq);
        let ones = vec![1.0; n];
        assert!(dot(&ones, &m.mul_vec(&l.eigenvector)).abs() <= cfg.tol);
        let s = smallest_positive_shift_invert(&k, &m, d.lambda_sq * 0.8, None, &cfg).unwrap();
        assert_eq!(s.kernel_dim, 1);
        assert!((s.lambda_sq - d.lambda_sq).abs() < 1e-10 * d.lambda_sq);
    }

    #[test]
    fn shift_on_eigenvalue_is_nudged() {
        let k = SparseSymMatrix::diagonal(&[1.0, 2.0, 5.0]);
        let m = SparseSymMatrix::identity(3);
        let r = smallest_positive_shift_invert(&k, &m, 2.0, None, &EigenConfig::default()).unwrap();
        assert!((r.lambda_sq - 1.0).abs() < 1e-12);
    }
}
