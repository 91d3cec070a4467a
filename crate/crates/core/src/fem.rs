//! Lowest-order finite element spaces of the de Rham complex on simplices:
//! Lagrange (P1), Nédélec edge (N) and Raviart–Thomas facet (RT) elements.
//!
//! Element matrices are integrated exactly with the barycentric moment formula
//! `int_T l_a l_b = |T| (1 + delta_ab) / ((d+1)(d+2))`. Edge and facet degrees
//! of freedom are oriented by ascending global node indices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{BoundarySelection, Mesh, TET_EDGES, TRI_EDGES};
use crate::sparse::{Provenance, SparseSymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous piecewise linear functions, one DOF per node.
    P1,
    /// Nédélec edge elements, one tangential DOF per edge.
    Nedelec,
    /// Raviart–Thomas elements, one normal-flux DOF per facet.
    RaviartThomas,
}

impl SpaceKind {
    pub fn short_name(self) -> &'static str {
        match self {
            SpaceKind::P1 => "P1",
            SpaceKind::Nedelec => "N",
            SpaceKind::RaviartThomas => "RT",
        }
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "p1" => Ok(SpaceKind::P1),
            "n" | "nedelec" => Ok(SpaceKind::Nedelec),
            "rt" | "raviart-thomas" => Ok(SpaceKind::RaviartThomas),
            other => Err(Error::Parse(format!("unknown space `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Mass,
    /// grad-grad, curl-curl or div-div, depending on the space.
    Stiffness,
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mass" => Ok(Operator::Mass),
            "stiff" | "stiffness" => Ok(Operator::Stiffness),
            other => Err(Error::Parse(format!("unknown operator `{other}`"))),
        }
    }
}

/// A finite element space on a mesh.
#[derive(Debug, Clone, Copy)]
pub struct FeSpace<'m> {
    pub kind: SpaceKind,
    pub mesh: &'m Mesh,
}

impl<'m> FeSpace<'m> {
    pub fn new(kind: SpaceKind, mesh: &'m Mesh) -> Self {
        FeSpace { kind, mesh }
    }

    pub fn ndofs(&self) -> usize {
        match self.kind {
            SpaceKind::P1 => self.mesh.num_nodes(),
            SpaceKind::Nedelec => self.mesh.num_edges(),
            SpaceKind::RaviartThomas => self.mesh.num_facets(),
        }
    }

    /// DOFs fixed to zero by the boundary selection.
    pub fn constrained_dofs<'s>(&self, selection: &'s BoundarySelection) -> &'s [usize] {
        match self.kind {
            SpaceKind::P1 => selection.constrained_nodes(),
            SpaceKind::Nedelec => selection.constrained_edges(),
            SpaceKind::RaviartThomas => selection.constrained_facets(),
        }
    }

    /// Global DOF indices of cell `c` with their orientation signs.
    fn cell_dofs(&self, c: usize) -> Vec<(usize, f64)> {
        let mesh = self.mesh;
        match self.kind {
            SpaceKind::P1 => mesh.cell(c).iter().map(|&v| (v, 1.0)).collect(),
            SpaceKind::Nedelec => mesh
                .cell_edges(c)
                .iter()
                .enumerate()
                .map(|(k, &e)| (e, mesh.local_edge_sign(c, k)))
                .collect(),
            SpaceKind::RaviartThomas => {
                let el = Simplex::of(mesh, c);
                mesh.cell_facets(c)
                    .into_iter()
                    .enumerate()
                    .map(|(k, f)| (f, facet_sign(mesh, &el, k, f)))
                    .collect()
            }
        }
    }
}

/// Geometry of one simplex: vertices, measure and barycentric gradients.
#[derive(Debug, Clone)]
pub struct Simplex {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    pub volume: f64,
    pub grads: Vec<[f64; 3]>,
}

impl Simplex {
    pub fn of(mesh: &Mesh, c: usize) -> Simplex {
        let points = mesh.cell(c).iter().map(|&v| mesh.nodes()[v]).collect();
        Simplex::from_points(mesh.dim(), points)
    }

    pub fn from_points(dim: usize, points: Vec<[f64; 3]>) -> Simplex {
        assert_eq!(points.len(), dim + 1);
        let p0 = points[0];
        let col = |k: usize, r: usize| points[k + 1][r] - p0[r];
        let mut grads = vec![[0.0; 3]; dim + 1];
        let volume;
        if dim == 2 {
            let (a, b, c2, d) = (col(0, 0), col(1, 0), col(0, 1), col(1, 1));
            let det = a * d - b * c2;
            // rows of the inverse of [[a, b], [c, d]]
            grads[1] = [d / det, -b / det, 0.0];
            grads[2] = [-c2 / det, a / det, 0.0];
            volume = det.abs() / 2.0;
        } else {
            let m = [
                [col(0, 0), col(1, 0), col(2, 0)],
                [col(0, 1), col(1, 1), col(2, 1)],
                [col(0, 2), col(1, 2), col(2, 2)],
            ];
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            for i in 0..3 {
                for j in 0..3 {
                    // inverse entry (i, j) = cofactor(j, i) / det
                    let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                    let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                    grads[i + 1][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
                }
            }
            volume = det.abs() / 6.0;
        }
        for r in 0..3 {
            grads[0][r] = -(1..=dim).map(|k| grads[k][r]).sum::<f64>();
        }
        Simplex {
            dim,
            points,
            volume,
            grads,
        }
    }

    /// `int_T l_a l_b`.
    pub fn moment(&self, a: usize, b: usize) -> f64 {
        let d = self.dim as f64;
        let delta = if a == b { 2.0 } else { 1.0 };
        self.volume * delta / ((d + 1.0) * (d + 2.0))
    }

    /// `grad l_a . grad l_b`.
    pub fn gg(&self, a: usize, b: usize) -> f64 {
        dot3(&self.grads[a], &self.grads[b])
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Global unit-free normal of facet `f` fixed by its ascending node order.
fn facet_normal(mesh: &Mesh, f: usize) -> [f64; 3] {
    let n = mesh.facet_nodes(f);
    let p = |i: usize| mesh.nodes()[n[i]];
    if mesh.dim() == 2 {
        let t = sub3(&p(1), &p(0));
        [t[1], -t[0], 0.0]
    } else {
        cross3(&sub3(&p(1), &p(0)), &sub3(&p(2), &p(0)))
    }
}

/// +1 if the global normal of facet `f` (opposite local vertex `k`) points out of the cell.
fn facet_sign(mesh: &Mesh, el: &Simplex, k: usize, f: usize) -> f64 {
    let n = facet_normal(mesh, f);
    let on_facet = mesh.nodes()[mesh.facet_nodes(f)[0]];
    if dot3(&n, &sub3(&on_facet, &el.points[k])) > 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn local_edges(dim: usize) -> &'static [[usize; 2]] {
    if dim == 2 {
        &TRI_EDGES
    } else {
        &TET_EDGES
    }
}

/// Unsigned element matrix of the local basis in the cell's vertex ordering.
fn element_matrix(kind: SpaceKind, op: Operator, el: &Simplex) -> Vec<Vec<f64>> {
    let nv = el.dim + 1;
    match (kind, op) {
        (SpaceKind::P1, Operator::Mass) => {
            (0..nv).map(|a| (0..nv).map(|b| el.moment(a, b)).collect()).collect()
        }
        (SpaceKind::P1, Operator::Stiffness) => (0..nv)
            .map(|a| (0..nv).map(|b| el.volume * el.gg(a, b)).collect())
            .collect(),
        (SpaceKind::Nedelec, op) => {
            let edges = local_edges(el.dim);
            edges
                .iter()
                .map(|&[a, b]| {
                    edges
                        .iter()
                        .map(|&[c, d]| match op {
                            // (l_a g_b - l_b g_a) . (l_c g_d - l_d g_c)
                            Operator::Mass => {
                                el.moment(a, c) * el.gg(b, d) - el.moment(a, d) * el.gg(b, c)
                                    - el.moment(b, c) * el.gg(a, d)
                                    + el.moment(b, d) * el.gg(a, c)
                            }
                            // curl = 2 g_a x g_b
                            Operator::Stiffness => {
                                4.0 * el.volume * (el.gg(a, c) * el.gg(b, d) - el.gg(a, d) * el.gg(b, c))
                            }
                        })
                        .collect()
                })
                .collect()
        }
        (SpaceKind::RaviartThomas, Operator::Mass) => {
            // phi_k = (x - p_k) / (d |T|),  x - p_k = sum_m l_m (p_m - p_k)
            let scale = 1.0 / (el.dim as f64 * el.volume).powi(2);
            (0..nv)
                .map(|k| {
                    (0..nv)
                        .map(|l| {
                            let mut s = 0.0;
                            for m in 0..nv {
                                let dm = sub3(&el.points[m], &el.points[k]);
                                for n in 0..nv {
                                    let dn = sub3(&el.points[n], &el.points[l]);
                                    s += el.moment(m, n) * dot3(&dm, &dn);
                                }
                            }
                            s * scale
                        })
                        .collect()
                })
                .collect()
        }
        (SpaceKind::RaviartThomas, Operator::Stiffness) => {
            vec![vec![1.0 / el.volume; nv]; nv]
        }
    }
}

/// Assembles the mass or stiffness matrix of `space`.
pub fn assemble(space: FeSpace<'_>, op: Operator) -> Result<SparseSymMatrix> {
    let mesh = space.mesh;
    let mut triplets = Vec::new();
    for c in 0..mesh.num_cells() {
        let el = Simplex::of(mesh, c);
        if el.volume <= 0.0 || !el.volume.is_finite() {
            return Err(Error::DegenerateCell(c));
        }
        let local = element_matrix(space.kind, op, &el);
        let dofs = space.cell_dofs(c);
        for (a, &(ga, sa)) in dofs.iter().enumerate() {
            for (b, &(gb, sb)) in dofs.iter().enumerate() {
                if ga >= gb {
                    triplets.push((ga, gb, sa * sb * local[a][b]));
                }
            }
        }
    }
    Ok(SparseSymMatrix::from_lower_triplets(space.ndofs(), &triplets).with_provenance(Provenance {
        space: space.kind,
        operator: op,
    }))
}

pub fn assemble_mass(space: FeSpace<'_>) -> Result<SparseSymMatrix> {
    assemble(space, Operator::Mass)
}

pub fn assemble_stiffness(space: FeSpace<'_>) -> Result<SparseSymMatrix> {
    assemble(space, Operator::Stiffness)
}

/// Removes the rows and columns of constrained DOFs. Returns the reduced
/// matrix and the map from reduced to original indices.
pub fn restrict(
    matrix: &SparseSymMatrix,
    space: FeSpace<'_>,
    selection: &BoundarySelection,
) -> Result<(SparseSymMatrix, Vec<usize>)> {
    if !selection.matches(space.mesh) {
        return Err(Error::SelectionMismatch);
    }
    if matrix.n() != space.ndofs() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows, space has {} DOFs",
            matrix.n(),
            space.ndofs()
        )));
    }
    let free = free_dofs(space, selection);
    Ok((matrix.submatrix(&free), free))
}

/// Ascending list of DOFs not fixed by `selection`.
pub fn free_dofs(space: FeSpace<'_>, selection: &BoundarySelection) -> Vec<usize> {
    let mut fixed = vec![false; space.ndofs()];
    for &i in space.constrained_dofs(selection) {
        fixed[i] = true;
    }
    (0..fixed.len()).filter(|&i| !fixed[i]).collect()
}

/// Interpolation of P1 gradients into the Nédélec space: `(G u)_e = u_j - u_i`
/// for the edge `e = (i, j)`, `i < j`.
#[derive(Debug, Clone)]
pub struct GradientMatrix {
    edges: Vec<[usize; 2]>,
    nodes: usize,
}

impl GradientMatrix {
    pub fn nrows(&self) -> usize {
        self.edges.len()
    }

    pub fn ncols(&self) -> usize {
        self.nodes
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        assert_eq!(u.len(), self.nodes);
        self.edges.iter().map(|&[i, j]| u[j] - u[i]).collect()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.edges
            .iter()
            .map(|&[i, j]| {
                let mut r = vec![0.0; self.nodes];
                r[i] = -1.0;
                r[j] = 1.0;
                r
            })
            .collect()
    }
}

pub fn gradient_interpolation(mesh: &Mesh) -> GradientMatrix {
    GradientMatrix {
        edges: mesh.edges().to_vec(),
        nodes: mesh.num_nodes(),
    }
}

/// Value of the finite element field with coefficients `coeffs` at the
/// barycenter of every cell. P1 fields give scalars in component 0.
pub fn cell_values(space: FeSpace<'_>, coeffs: &[f64]) -> Vec<[f64; 3]> {
    let mesh = space.mesh;
    assert_eq!(coeffs.len(), space.ndofs());
    (0..mesh.num_cells())
        .map(|c| {
            let el = Simplex::of(mesh, c);
            let nv = (el.dim + 1) as f64;
            let dofs = space.cell_dofs(c);
            let mut v = [0.0; 3];
            match space.kind {
                SpaceKind::P1 => {
                    v[0] = dofs.iter().map(|&(g, _)| coeffs[g]).sum::<f64>() / nv;
                }
                SpaceKind::Nedelec => {
                    for (k, &[a, b]) in local_edges(el.dim).iter().enumerate() {
                        let (g, s) = dofs[k];
                        for r in 0..3 {
                            v[r] += coeffs[g] * s * (el.grads[b][r] - el.grads[a][r]) / nv;
                        }
                    }
                }
                SpaceKind::RaviartThomas => {
                    let bc = mesh.cell_barycenter(c);
                    for (k, &(g, s)) in dofs.iter().enumerate() {
                        let d = sub3(&bc, &el.points[k]);
                        for r in 0..3 {
                            v[r] += coeffs[g] * s * d[r] / (el.dim as f64 * el.volume);
                        }
                    }
                }
            }
            v
        })
        .collect()
}

/// Squared L2 norms of the full gradient, rotation and divergence of a
/// 2D vector field whose components are P1 functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorFieldNorms {
    pub grad_sq: f64,
    pub rot_sq: f64,
    pub div_sq: f64,
}

pub fn vector_p1_norms(mesh: &Mesh, u1: &[f64], u2: &[f64]) -> VectorFieldNorms {
    assert_eq!(mesh.dim(), 2, "vector P1 norms are defined for 2D meshes");
    let mut out = VectorFieldNorms {
        grad_sq: 0.0,
        rot_sq: 0.0,
        div_sq: 0.0,
    };
    for c in 0..mesh.num_cells() {
        let el = Simplex::of(mesh, c);
        let mut g1 = [0.0; 2];
        let mut g2 = [0.0; 2];
        for (k, &v) in mesh.cell(c).iter().enumerate() {
            for r in 0..2 {
                g1[r] += u1[v] * el.grads[k][r];
                g2[r] += u2[v] * el.grads[k][r];
            }
        }
        let rot = g2[0] - g1[1];
        let div = g1[0] + g2[1];
        out.grad_sq += el.volume * (g1[0] * g1[0] + g1[1] * g1[1] + g2[0] * g2[0] + g2[1] * g2[1]);
        out.rot_sq += el.volume * rot * rot;
        out.div_sq += el.volume * div * div;
    }
    out
}
