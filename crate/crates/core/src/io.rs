//! File formats: legacy VTK for meshes and eigenfunctions, MatrixMarket for
//! assembled matrices and CSV for tables and sweeps.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fem::{cell_values, FeSpace, SpaceKind};
use crate::harness::{ConvergenceTable, SweepResult, SWEEP_HEADERS};
use crate::mesh::Mesh;
use crate::sparse::SparseSymMatrix;

/// Writes `mesh` as an ASCII legacy VTK unstructured grid. With a field, P1
/// coefficients become point scalars and N/RT fields become cell vectors
/// evaluated at the barycenters.
pub fn write_vtk<W: Write>(out: &mut W, mesh: &Mesh, field: Option<(&str, SpaceKind, &[f64])>) -> Result<()> {
    let nv = mesh.dim() + 1;
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "pfconst {}D mesh", mesh.dim())?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_nodes())?;
    for p in mesh.nodes() {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    writeln!(out, "CELLS {} {}", mesh.num_cells(), mesh.num_cells() * (nv + 1))?;
    for cell in mesh.cells() {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", nv, ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.num_cells())?;
    let vtk_type = if mesh.dim() == 2 { 5 } else { 10 };
    for _ in 0..mesh.num_cells() {
        writeln!(out, "{vtk_type}")?;
    }
    if let Some((name, kind, coeffs)) = field {
        let space = FeSpace::new(kind, mesh);
        if coeffs.len() != space.ndofs() {
            return Err(Error::DimensionMismatch(format!(
                "field has {} coefficients, {} space has {}",
                coeffs.len(),
                kind,
                space.ndofs()
            )));
        }
        let name: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
        match kind {
            SpaceKind::P1 => {
                writeln!(out, "POINT_DATA {}", mesh.num_nodes())?;
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in coeffs {
                    writeln!(out, "{v}")?;
                }
            }
            SpaceKind::Nedelec | SpaceKind::RaviartThomas => {
                writeln!(out, "CELL_DATA {}", mesh.num_cells())?;
                writeln!(out, "VECTORS {name} double")?;
                for v in cell_values(space, coeffs) {
                    writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
                }
            }
        }
    }
    Ok(())
}

/// Writes the full symmetric matrix in MatrixMarket coordinate format with
/// the `symmetric` qualifier (lower triangle, 1-based indices).
pub fn write_matrix_market<W: Write>(out: &mut W, a: &SparseSymMatrix) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{} {} {}", a.n(), a.n(), a.nnz_lower())?;
    for (i, j, v) in a.lower_entries() {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(input: R) -> Result<SparseSymMatrix> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty MatrixMarket file".into()))??;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() != 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(Error::Parse(format!("unsupported MatrixMarket header `{header}`")));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(Error::Parse(format!("unsupported field type `{}`", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::Parse(format!("unsupported symmetry `{other}`"))),
    };
    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut upper = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        match size {
            None => {
                if f.len() != 3 {
                    return Err(Error::Parse(format!("bad size line `{t}`")));
                }
                let (r, c, nnz) = (num(f[0])?, num(f[1])?, num(f[2])?);
                if r != c {
                    return Err(Error::DimensionMismatch(format!("{r}x{c} matrix is not square")));
                }
                size = Some((r, nnz));
                triplets.reserve(nnz);
            }
            Some((n, _)) => {
                if f.len() != 3 {
                    return Err(Error::Parse(format!("bad entry line `{t}`")));
                }
                let (i, j) = (num(f[0])?, num(f[1])?);
                let v: f64 = f[2].parse().map_err(|e| Error::Parse(format!("`{}`: {e}", f[2])))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse(format!("entry ({i}, {j}) out of range")));
                }
                let (i, j) = (i - 1, j - 1);
                if j <= i {
                    triplets.push((i, j, v));
                } else if symmetric {
                    return Err(Error::Parse(format!("upper entry ({}, {}) in symmetric file", i + 1, j + 1)));
                } else {
                    upper.push((i, j, v));
                }
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    if triplets.len() + upper.len() != nnz {
        return Err(Error::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len() + upper.len()
        )));
    }
    if !symmetric {
        // a general file is accepted when it is symmetric
        let a = SparseSymMatrix::from_lower_triplets(n, &triplets);
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut mirrored = SparseSymMatrix::from_lower_triplets(n, &[]);
        let t: Vec<_> = upper.iter().map(|&(i, j, v)| (j, i, v)).collect();
        if !t.is_empty() {
            mirrored = SparseSymMatrix::from_lower_triplets(n, &t);
        }
        for (i, j, v) in a.lower_entries().filter(|&(i, j, _)| i != j) {
            if (mirrored.get(i, j) - v).abs() > 1e-14 * scale {
                return Err(Error::Parse(format!("matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
        for (i, j, v) in mirrored.lower_entries() {
            if (a.get(i, j) - v).abs() > 1e-14 * scale {
                return Err(Error::Parse(format!("matrix is not symmetric at ({}, {})", j + 1, i + 1)));
            }
        }
        return Ok(a);
    }
    Ok(SparseSymMatrix::from_lower_triplets(n, &triplets))
}

/// A table as written to CSV: one label column followed by value columns,
/// values with 8 decimals and empty cells for missing values.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub label: String,
    pub headers: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl CsvTable {
    /// One row per level plus an `inf` row with the exact limits when known.
    pub fn from_convergence(t: &ConvergenceTable) -> Self {
        let mut rows: Vec<(String, Vec<Option<f64>>)> = t
            .rows
            .iter()
            .map(|r| (r.level.to_string(), r.values.iter().copied().map(Some).collect()))
            .collect();
        if let Some(lim) = &t.limits {
            rows.push(("inf".to_string(), lim.iter().copied().map(Some).collect()));
        }
        CsvTable {
            label: "level".to_string(),
            headers: t.columns.iter().map(|c| c.header()).collect(),
            rows,
        }
    }

    pub fn from_sweep(s: &SweepResult) -> Self {
        CsvTable {
            label: "neumann_facets".to_string(),
            headers: SWEEP_HEADERS.iter().map(|h| h.to_string()).collect(),
            rows: s
                .steps
                .iter()
                .map(|st| (st.neumann_facets.to_string(), st.values.to_vec()))
                .collect(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.label.clone()];
        header.extend(self.headers.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (label, values) in &self.rows {
            let mut rec = vec![label.clone()];
            rec.extend(values.iter().map(|v| v.map(|x| format!("{x:.8}")).unwrap_or_default()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header = r.headers().map_err(csv_err)?.clone();
        let mut fields = header.iter().map(str::to_string);
        let label = fields.next().ok_or_else(|| Error::Parse("CSV has no columns".into()))?;
        let headers: Vec<String> = fields.collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            let mut it = rec.iter();
            let name = it.next().unwrap_or_default().to_string();
            let values = it
                .map(|s| {
                    if s.trim().is_empty() {
                        Ok(None)
                    } else {
                        s.trim()
                            .parse::<f64>()
                            .map(Some)
                            .map_err(|e| Error::Parse(format!("`{s}`: {e}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push((name, values));
        }
        Ok(CsvTable { label, headers, rows })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}
