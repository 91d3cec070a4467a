use faer::linalg::solvers::Solve;
use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{get_global_parallelism, Mat, MatRef, Side};

use super::{check_pencil, finish, EigenConfig, EigenResult, Method};
use crate::error::{Error, Result};
use crate::sparse::SparseSymMatrix;

pub(crate) fn to_dense_mat(a: &SparseSymMatrix) -> Mat<f64> {
    let mut d = Mat::<f64>::zeros(a.n(), a.n());
    for (i, j, v) in a.lower_entries() {
        d[(i, j)] = v;
        d[(j, i)] = v;
    }
    d
}

fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
}

fn col_to_vec(a: MatRef<'_, f64>, j: usize) -> Vec<f64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

/// Full spectrum and eigenvectors of the pencil, eigenvalues ascending.
fn dense_pairs(k: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<(Vec<f64>, Mat<f64>)> {
    check_pencil(k, m)?;
    let md = to_dense_mat(m);
    let llt = md
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("mass matrix: {e:?}")))?;
    let l = llt.L();
    // C = L^-1 K L^-T
    let mut y = to_dense_mat(k);
    solve_lower_triangular_in_place(l, y.as_mut(), get_global_parallelism());
    let mut c = y.transpose().to_owned();
    solve_lower_triangular_in_place(l, c.as_mut(), get_global_parallelism());
    symmetrize(&mut c);
    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Dense(format!("symmetric eigensolver: {e:?}")))?;
    let values: Vec<f64> = (0..c.nrows()).map(|i| evd.S().column_vector()[i]).collect();
    let mut vectors = evd.U().to_owned();
    solve_upper_triangular_in_place(l.transpose(), vectors.as_mut(), get_global_parallelism());
    Ok((values, vectors))
}

/// All eigenvalues of `K v = l M v` in ascending order, by Cholesky reduction
/// of `M` and a dense symmetric eigensolve.
pub fn dense_generalized_eig(k: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<Vec<f64>> {
    dense_pairs(k, m).map(|(v, _)| v)
}

/// Smallest positive eigenvalue from the full dense spectrum. Eigenvalues up to
/// `kernel_rel_tol` times the largest one are counted as kernel.
pub fn smallest_positive_dense(k: &SparseSymMatrix, m: &SparseSymMatrix, cfg: &EigenConfig) -> Result<EigenResult> {
    let (values, vectors) = dense_pairs(k, m)?;
    let top = values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let floor = cfg.kernel_rel_tol * top;
    let kernel_dim = values.iter().take_while(|&&x| x <= floor).count();
    if kernel_dim == values.len() {
        return Err(Error::NoPositiveEigenvalue);
    }
    let v = col_to_vec(vectors.as_ref(), kernel_dim);
    finish(k, m, values[kernel_dim], v, kernel_dim, Method::Dense, 0)
}

/// Range-projection method. With the column-pivoted QR factorization
/// `K E = Q R` and `Q_r` the first `r` columns of `Q` (r = numerical rank),
/// the positive spectrum of the pencil equals the spectrum of
/// `Q_r^T M^-1 K Q_r = P S` with `P = Q_r^T M^-1 Q_r` and `S = Q_r^T K Q_r`.
/// This product is similar to the symmetric `L^T S L` where `P = L L^T`;
/// an eigenvector `u` of that matrix lifts to `v = M^-1 Q_r S L u`.
pub fn smallest_positive_projected(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    cfg: &EigenConfig,
) -> Result<EigenResult> {
    check_pencil(k, m)?;
    let n = k.n();
    let rank_tol = cfg.rank_tol_for(n);
    let kd = to_dense_mat(k);
    let qr = kd.col_piv_qr();
    let r_full = qr.R();
    let r11 = r_full[(0, 0)].abs();
    if !(r11 > 0.0) {
        return Err(Error::NoPositiveEigenvalue);
    }
    let rank = (0..n).take_while(|&i| r_full[(i, i)].abs() > rank_tol * r11).count();
    let q_full = qr.compute_thin_Q();
    let q = q_full.subcols(0, rank).to_owned();

    // K Q_r = E R^T Q^T Q_r = E (R[..r, :])^T
    let (fwd, _) = qr.P().arrays();
    let mut kq = Mat::<f64>::zeros(n, rank);
    for (j, &pj) in fwd.iter().enumerate() {
        for c in 0..rank.min(j + 1) {
            kq[(pj, c)] = r_full[(c, j)];
        }
    }

    let md = to_dense_mat(m);
    let m_llt = md
        .llt(Side::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("mass matrix: {e:?}")))?;
    let minv_q = m_llt.solve(&q);
    let mut p = q.transpose() * &minv_q;
    let mut s = q.transpose() * &kq;
    symmetrize(&mut p);
    symmetrize(&mut s);
    let p_llt = p
        .llt(Side::Lower)
        .map_err(|e| Error::Dense(format!("projected mass is not definite: {e:?}")))?;
    let l = p_llt.L().to_owned();
    let mut b = l.transpose() * &s * &l;
    symmetrize(&mut b);
    let evd = b
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Dense(format!("symmetric eigensolver: {e:?}")))?;
    let lambda_sq = evd.S().column_vector()[0];
    let u = evd.U().subcols(0, 1).to_owned();
    let v = &minv_q * (&s * (&l * &u));
    let mut res = finish(k, m, lambda_sq, col_to_vec(v.as_ref(), 0), n - rank, Method::Projected, 0)?;
    res.rank_tol = Some(rank_tol);
    Ok(res)
}
