//! Smallest positive eigenvalue of symmetric pencils `K v = lambda^2 M v`
//! with `K` positive semidefinite and `M` positive definite.

mod dense;
mod lanczos;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use dense::{dense_generalized_eig, smallest_positive_dense, smallest_positive_projected};
pub use lanczos::{smallest_positive_lowest_k, smallest_positive_shift_invert};

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseSymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Projected,
    ShiftInvert,
    LowestK,
    Dense,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Projected => "projected",
            Method::ShiftInvert => "shift_invert",
            Method::LowestK => "lowest_k",
            Method::Dense => "dense",
        })
    }
}

/// Solver selection as exposed to callers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Auto,
    Projected,
    Shift,
    Dense,
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(SolverChoice::Auto),
            "projected" | "qr" => Ok(SolverChoice::Projected),
            "shift" | "shift-invert" | "shift_invert" => Ok(SolverChoice::Shift),
            "dense" => Ok(SolverChoice::Dense),
            other => Err(Error::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    /// Relative residual tolerance `|K v - l M v| <= tol * l * |M v|`.
    pub tol: f64,
    /// Budget of operator applications for iterative solvers.
    pub max_iter: usize,
    /// QR diagonal cutoff relative to `|R_11|`; `None` means `1e-9 * n`.
    pub rank_tol: Option<f64>,
    /// Dense eigenvalues below this fraction of the largest count as kernel.
    pub kernel_rel_tol: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig {
            tol: 1e-10,
            max_iter: 500,
            rank_tol: None,
            kernel_rel_tol: 1e-9,
        }
    }
}

impl EigenConfig {
    pub fn rank_tol_for(&self, n: usize) -> f64 {
        self.rank_tol.unwrap_or(1e-9 * n as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda_sq: f64,
    pub lambda: f64,
    /// M-normalized; largest-magnitude coefficient is positive.
    pub eigenvector: Vec<f64>,
    pub kernel_dim: usize,
    pub method: Method,
    pub iterations: usize,
    /// Relative residual `|K v - lambda_sq M v| / (lambda_sq |M v|)`.
    pub residual_norm: f64,
    pub rank_tol: Option<f64>,
    pub shift: Option<f64>,
}

/// Solver diagnostics without the eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub method: Method,
    pub lambda_sq: f64,
    pub iterations: usize,
    pub residual_norm: f64,
    pub kernel_dim: usize,
    pub rank_tol: Option<f64>,
    pub shift: Option<f64>,
}

impl EigenResult {
    pub fn diagnostics(&self) -> Diagnostics {
        Diagnostics {
            method: self.method,
            lambda_sq: self.lambda_sq,
            iterations: self.iterations,
            residual_norm: self.residual_norm,
            kernel_dim: self.kernel_dim,
            rank_tol: self.rank_tol,
            shift: self.shift,
        }
    }

    /// Scatters the eigenvector of a restricted pencil into `n` original DOFs
    /// (`free[i]` is the original index of reduced DOF `i`).
    pub fn lifted(&self, free: &[usize], n: usize) -> Vec<f64> {
        assert_eq!(free.len(), self.eigenvector.len());
        let mut full = vec![0.0; n];
        for (&g, &x) in free.iter().zip(&self.eigenvector) {
            full[g] = x;
        }
        full
    }
}

pub(crate) fn check_pencil(k: &SparseSymMatrix, m: &SparseSymMatrix) -> Result<()> {
    if k.n() != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "stiffness is {0}x{0}, mass is {1}x{1}",
            k.n(),
            m.n()
        )));
    }
    if k.n() == 0 {
        return Err(Error::NoPositiveEigenvalue);
    }
    Ok(())
}

/// Relative residual of an eigenpair.
pub fn relative_residual(k: &SparseSymMatrix, m: &SparseSymMatrix, lambda_sq: f64, v: &[f64]) -> f64 {
    let kv = k.mul_vec(v);
    let mv = m.mul_vec(v);
    let r: Vec<f64> = kv.iter().zip(&mv).map(|(a, b)| a - lambda_sq * b).collect();
    norm2(&r) / (lambda_sq.abs() * norm2(&mv))
}

/// M-normalizes `v`, fixes its sign and packages the result.
pub(crate) fn finish(
    k: &SparseSymMatrix,
    m: &SparseSymMatrix,
    lambda_sq: f64,
    mut v: Vec<f64>,
    kernel_dim: usize,
    method: Method,
    iterations: usize,
) -> Result<EigenResult> {
    if !(lambda_sq > 0.0) || !lambda_sq.is_finite() {
        return Err(Error::NoPositiveEigenvalue);
    }
    let norm = dot(&v, &m.mul_vec(&v)).sqrt();
    if !(norm > 0.0) {
        return Err(Error::NotConverged {
            iterations,
            residual: f64::NAN,
            context: "eigenvector vanished".into(),
        });
    }
    let pivot = v.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    let scale = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
    v.iter_mut().for_each(|x| *x *= scale);
    let residual_norm = relative_residual(k, m, lambda_sq, &v);
    Ok(EigenResult {
        lambda_sq,
        lambda: lambda_sq.sqrt(),
        eigenvector: v,
        kernel_dim,
        method,
        iterations,
        residual_norm,
        rank_tol: None,
        shift: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagnostics_serialize() {
        let r = EigenResult {
            lambda_sq: 2.0,
            lambda: 2f64.sqrt(),
            eigenvector: vec![1.0],
            kernel_dim: 1,
            method: Method::ShiftInvert,
            iterations: 3,
            residual_norm: 1e-12,
            rank_tol: None,
            shift: Some(1.5),
        };
        let json = serde_json::to_string(&r.diagnostics()).unwrap();
        assert!(json.contains("\"method\":\"shift_invert\""));
        let back: Diagnostics = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r.diagnostics());
    }

    #[test]
    fn lifting_places_zeros_on_constrained_dofs() {
        let r = EigenResult {
            lambda_sq: 1.0,
            lambda: 1.0,
            eigenvector: vec![0.5, -0.25],
            kernel_dim: 0,
            method: Method::Dense,
            iterations: 0,
            residual_norm: 0.0,
            rank_tol: None,
            shift: None,
        };
        assert_eq!(r.lifted(&[1, 3], 4), vec![0.0, 0.5, 0.0, -0.25]);
    }
}
