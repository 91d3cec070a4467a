//! Sparse `L D L^T` factorization without pivoting (up-looking, elimination-tree based).
//!
//! The factorization is used for symmetric indefinite shifted pencils
//! `K - sigma M`; the signs of `D` give the inertia by Sylvester's law.

use super::ordering::nested_dissection;
use super::SparseSymMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Pivots smaller than this relative to the largest entry of their row signal breakdown.
const PIVOT_TOL: f64 = 1e-14;

/// Ordering and elimination structure, reusable for every matrix with the same pattern.
#[derive(Debug, Clone)]
pub struct LdlSymbolic {
    n: usize,
    perm: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
}

/// Numeric factor `P A P^T = L D L^T`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    symbolic: LdlSymbolic,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    d: Vec<f64>,
}

/// Counts of negative, zero and positive pivots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl LdlSymbolic {
    /// Computes a nested-dissection ordering and the elimination tree of `a`.
    pub fn analyze(a: &SparseSymMatrix) -> Self {
        let perm = nested_dissection(&a.graph());
        Self::with_ordering(a, perm)
    }

    /// Uses the caller's ordering `perm[new] = old`.
    pub fn with_ordering(a: &SparseSymMatrix, perm: Vec<usize>) -> Self {
        let n = a.n();
        assert_eq!(perm.len(), n);
        let c = a.permuted(&perm);
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let (cols, _) = c.row(k);
            for &j in cols {
                let mut i = j;
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        LdlSymbolic {
            n,
            perm,
            parent,
            col_ptr,
        }
    }

    /// Nonzeros of the strictly lower factor.
    pub fn nnz_l(&self) -> usize {
        self.col_ptr[self.n]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Numeric factorization of `a`, which must share the analyzed pattern
    /// (entries outside it are not allowed; explicit zeros are fine).
    pub fn factor(&self, a: &SparseSymMatrix) -> Result<LdlFactor> {
        let n = self.n;
        if a.n() != n {
            return Err(Error::DimensionMismatch(format!("factor {n} vs matrix {}", a.n())));
        }
        let c = a.permuted(&self.perm);
        let lnz_total = self.nnz_l();
        let mut row_idx = vec![0usize; lnz_total];
        let mut values = vec![0.0; lnz_total];
        let mut d = vec![0.0; n];
        let mut y = vec![0.0; n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let (cols, vals) = c.row(k);
            let mut row_scale = 0.0f64;
            for (&j, &v) in cols.iter().zip(vals) {
                row_scale = row_scale.max(v.abs());
                y[j] += v;
                let mut i = j;
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = self.parent[i];
                    if i == NONE {
                        return Err(Error::DimensionMismatch(
                            "matrix pattern differs from the analyzed pattern".into(),
                        ));
                    }
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let start = self.col_ptr[i];
                let end = start + lnz[i];
                for p in start..end {
                    y[row_idx[p]] -= values[p] * yi;
                }
                let l_ki = yi / d[i];
                dk -= l_ki * yi;
                row_idx[end] = k;
                values[end] = l_ki;
                lnz[i] += 1;
            }
            if !dk.is_finite() || dk.abs() <= PIVOT_TOL * row_scale {
                return Err(Error::FactorizationBreakdown { pivot: k, shift: f64::NAN });
            }
            d[k] = dk;
        }
        Ok(LdlFactor {
            symbolic: self.clone(),
            row_idx,
            values,
            d,
        })
    }
}

impl LdlFactor {
    /// Analyzes and factors `a` in one step.
    pub fn new(a: &SparseSymMatrix) -> Result<Self> {
        LdlSymbolic::analyze(a).factor(a)
    }

    pub fn n(&self) -> usize {
        self.symbolic.n
    }

    pub fn nnz_l(&self) -> usize {
        self.symbolic.nnz_l()
    }

    pub fn inertia(&self) -> Inertia {
        let mut out = Inertia {
            negative: 0,
            zero: 0,
            positive: 0,
        };
        for &v in &self.d {
            if v < 0.0 {
                out.negative += 1;
            } else if v > 0.0 {
                out.positive += 1;
            } else {
                out.zero += 1;
            }
        }
        out
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        assert_eq!(b.len(), n);
        let perm = &self.symbolic.perm;
        let cp = &self.symbolic.col_ptr;
        let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let yj = y[j];
            if yj != 0.0 {
                for p in cp[j]..cp[j + 1] {
                    y[self.row_idx[p]] -= self.values[p] * yj;
                }
            }
        }
        for (v, d) in y.iter_mut().zip(&self.d) {
            *v /= d;
        }
        for j in (0..n).rev() {
            let mut acc = y[j];
            for p in cp[j]..cp[j + 1] {
                acc -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = acc;
        }
        for (k, &p) in perm.iter().enumerate() {
            b[p] = y[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
