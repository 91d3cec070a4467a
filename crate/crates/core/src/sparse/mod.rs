//! Symmetric sparse matrices stored as the lower triangle in compressed-row form.

mod ldl;
mod ordering;

pub use ldl::{Inertia, LdlFactor, LdlSymbolic};
pub use ordering::{nested_dissection, Graph};

use crate::error::{Error, Result};
use crate::fem::{Operator, SpaceKind};

/// Where an assembled matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub space: SpaceKind,
    pub operator: Operator,
}

/// Symmetric matrix; only entries `(i, j)` with `j <= i` are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    provenance: Option<Provenance>,
}

impl SparseSymMatrix {
    /// Builds the matrix from lower-triangle triplets `(row, col, value)` with
    /// `col <= row`. Duplicates are summed.
    pub fn from_lower_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, j, _) in triplets {
            assert!(j <= i && i < n, "triplet ({i}, {j}) outside the lower triangle of a {n}x{n} matrix");
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_unstable_by_key(|e| e.0);
            for &(j, v) in &scratch {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSymMatrix {
            n,
            row_ptr,
            col_idx,
            values,
            provenance: None,
        }
    }

    /// Builds the matrix from a dense symmetric matrix given by rows (lower part is read).
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "dense matrix must be square");
            for (j, &v) in row.iter().enumerate().take(i + 1) {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_lower_triplets(n, &t)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_lower_triplets(d.len(), &t)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored (lower-triangle) entries.
    pub fn nnz_lower(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices and values of stored row `i` (columns `<= i`, ascending).
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|p| vals[p]).unwrap_or(0.0)
    }

    /// Iterator over stored lower-triangle entries.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(move |(&j, &x)| (i, j, x))
        })
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let xi = x[i];
            let mut acc = 0.0;
            for (&j, &a) in cols.iter().zip(vals) {
                acc += a * x[j];
                if j != i {
                    y[j] += a * xi;
                }
            }
            y[i] += acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &a) in cols.iter().zip(vals) {
                let t = a * x[i] * x[j];
                s += if i == j { t } else { 2.0 * t };
            }
        }
        s
    }

    /// Largest absolute stored entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Row sums of the full symmetric matrix.
    pub fn row_sums(&self) -> Vec<f64> {
        self.mul_vec(&vec![1.0; self.n])
    }

    /// Principal submatrix on the (ascending) index set `keep`.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = Vec::new();
        for &old in keep {
            let (cols, vals) = self.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let nj = map[j];
                if nj != usize::MAX {
                    let ni = map[old];
                    t.push((ni.max(nj), ni.min(nj), v));
                }
            }
        }
        let mut m = Self::from_lower_triplets(keep.len(), &t);
        m.provenance = self.provenance;
        m
    }

    /// Symmetric permutation `B[i][j] = A[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut inv = vec![usize::MAX; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let t: Vec<_> = self
            .lower_entries()
            .map(|(i, j, v)| {
                let (a, b) = (inv[i], inv[j]);
                (a.max(b), a.min(b), v)
            })
            .collect();
        let mut m = Self::from_lower_triplets(self.n, &t);
        m.provenance = self.provenance;
        m
    }

    /// `alpha * A + beta * B` on the union of both patterns.
    pub fn linear_combination(alpha: f64, a: &Self, beta: f64, b: &Self) -> Result<Self> {
        if a.n != b.n {
            return Err(Error::DimensionMismatch(format!("{} vs {}", a.n, b.n)));
        }
        let t: Vec<_> = a
            .lower_entries()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(b.lower_entries().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        Ok(Self::from_lower_triplets(a.n, &t))
    }

    /// Dense row-major copy of the full symmetric matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.lower_entries() {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }

    /// Off-diagonal adjacency graph of the full pattern.
    pub fn graph(&self) -> Graph {
        let mut deg = vec![0usize; self.n];
        for (i, j, _) in self.lower_entries() {
            if i != j {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
        let mut xadj = vec![0usize; self.n + 1];
        for i in 0..self.n {
            xadj[i + 1] = xadj[i] + deg[i];
        }
        let mut next = xadj.clone();
        let mut adj = vec![0usize; xadj[self.n]];
        for (i, j, _) in self.lower_entries() {
            if i != j {
                adj[next[i]] = j;
                next[i] += 1;
                adj[next[j]] = i;
                next[j] += 1;
            }
        }
        Graph::new(xadj, adj)
    }
}

/// `x^T y`.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
