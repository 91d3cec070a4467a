//! Structured simplicial meshes of the benchmark domains.
//!
//! Every mesh lives in the unit box. Entities (edges, faces) are stored with
//! ascending global node indices, which fixes their orientation once and for
//! all; per-cell incidence carries the sign of the local orientation relative
//! to the global one.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Benchmark domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Unit square `(0,1)^2`.
    Square,
    /// Unit square without the top-right quadrant.
    LShape,
    /// Unit cube `(0,1)^3`.
    Cube,
    /// Unit cube without the octant `(0,1/2) x (1/2,1) x (1/2,1)`.
    Fichera,
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::Square | Domain::LShape => 2,
            Domain::Cube | Domain::Fichera => 3,
        }
    }

    pub fn build(self, level: u32) -> Result<Mesh> {
        match self {
            Domain::Square => build_unit_square(level),
            Domain::LShape => build_lshape(level),
            Domain::Cube => build_unit_cube(level),
            Domain::Fichera => build_fichera(level),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
            Domain::Cube => "cube",
            Domain::Fichera => "fichera",
        }
    }

    /// Total measure of the domain.
    pub fn measure(self) -> f64 {
        match self {
            Domain::Square | Domain::Cube => 1.0,
            Domain::LShape => 0.75,
            Domain::Fichera => 0.875,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(Domain::Square),
            "lshape" | "l-shape" => Ok(Domain::LShape),
            "cube" => Ok(Domain::Cube),
            "fichera" => Ok(Domain::Fichera),
            other => Err(Error::Parse(format!("unknown domain `{other}`"))),
        }
    }
}

/// Label of a boundary part of the unit box.
///
/// In 2D: `b`: x2=0, `t`: x2=1, `l`: x1=0, `r`: x1=1.
/// In 3D: `k`: x1=0, `f`: x1=1, `l`: x2=0, `r`: x2=1, `b`: x3=0, `t`: x3=1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryLabel {
    B,
    T,
    L,
    R,
    F,
    K,
}

impl BoundaryLabel {
    pub const ALL_2D: [BoundaryLabel; 4] = [Self::B, Self::T, Self::L, Self::R];
    pub const ALL_3D: [BoundaryLabel; 6] = [Self::B, Self::T, Self::L, Self::R, Self::F, Self::K];

    pub fn all(dim: usize) -> &'static [BoundaryLabel] {
        if dim == 2 {
            &Self::ALL_2D
        } else {
            &Self::ALL_3D
        }
    }

    /// Label of the axis-aligned facet with outward normal `sign * e_axis`.
    pub fn from_normal(dim: usize, axis: usize, positive: bool) -> Option<Self> {
        use BoundaryLabel::*;
        let pair = match (dim, axis) {
            (2, 0) => (L, R),
            (2, 1) => (B, T),
            (3, 0) => (K, F),
            (3, 1) => (L, R),
            (3, 2) => (B, T),
            _ => return None,
        };
        Some(if positive { pair.1 } else { pair.0 })
    }

    /// Inverse of [`BoundaryLabel::from_normal`]: `(axis, positive side)`.
    pub fn axis_side(self, dim: usize) -> Option<(usize, bool)> {
        use BoundaryLabel::*;
        match (dim, self) {
            (2, L) => Some((0, false)),
            (2, R) => Some((0, true)),
            (2, B) => Some((1, false)),
            (2, T) => Some((1, true)),
            (3, K) => Some((0, false)),
            (3, F) => Some((0, true)),
            (3, L) => Some((1, false)),
            (3, R) => Some((1, true)),
            (3, B) => Some((2, false)),
            (3, T) => Some((2, true)),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::B => 'b',
            Self::T => 't',
            Self::L => 'l',
            Self::R => 'r',
            Self::F => 'f',
            Self::K => 'k',
        }
    }

    /// Parses a comma separated label list such as `b,l,k`. The empty string
    /// and `none` give the empty set; `all` gives every label of `dim`.
    pub fn parse_list(s: &str, dim: usize) -> Result<Vec<BoundaryLabel>> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(Vec::new());
        }
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::all(dim).to_vec());
        }
        let mut out = Vec::new();
        for tok in s.split(',') {
            let l: BoundaryLabel = tok.parse()?;
            if l.axis_side(dim).is_none() {
                return Err(Error::UnknownLabel(format!("{tok} (dim {dim})")));
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        out.sort();
        Ok(out)
    }
}

impl fmt::Display for BoundaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for BoundaryLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "b" => Ok(Self::B),
            "t" => Ok(Self::T),
            "l" => Ok(Self::L),
            "r" => Ok(Self::R),
            "f" => Ok(Self::F),
            "k" => Ok(Self::K),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Formats a label set as `b,l,k` (or `none`).
pub fn format_labels(labels: &[BoundaryLabel]) -> String {
    if labels.is_empty() {
        return "none".to_string();
    }
    labels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}

/// Simplicial mesh with full entity tables.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<[f64; 3]>,
    /// `dim + 1` node indices per cell, positively oriented.
    cells: Vec<usize>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    cell_edges: Vec<usize>,
    cell_faces: Vec<usize>,
    face_edges: Vec<[usize; 3]>,
    /// Cells adjacent to each facet (second entry `usize::MAX` on the boundary).
    facet_cells: Vec<[usize; 2]>,
    boundary_facets: Vec<usize>,
    facet_labels: Vec<BoundaryLabel>,
}

/// Local vertex pairs spanning the edges of a triangle.
pub const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];
/// Local vertex pairs spanning the edges of a tetrahedron.
pub const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

impl Mesh {
    /// Builds a mesh from nodes and cells, deriving all entity tables.
    ///
    /// Cells with negative orientation are flipped; cells of zero volume are
    /// rejected.
    pub fn from_cells(dim: usize, nodes: Vec<[f64; 3]>, cells: Vec<usize>) -> Result<Mesh> {
        assert!(dim == 2 || dim == 3, "only 2D and 3D meshes are supported");
        let nv = dim + 1;
        assert_eq!(cells.len() % nv, 0);
        let mut cells = cells;
        for (c, cell) in cells.chunks_mut(nv).enumerate() {
            let vol = signed_volume(dim, &nodes, cell);
            if vol == 0.0 || !vol.is_finite() {
                return Err(Error::DegenerateCell(c));
            }
            if vol < 0.0 {
                cell.swap(nv - 2, nv - 1);
            }
        }
        let ncells = cells.len() / nv;
        let local_edges: &[[usize; 2]] = if dim == 2 { &TRI_EDGES } else { &TET_EDGES };

        let mut edges: Vec<[usize; 2]> = Vec::with_capacity(ncells * local_edges.len());
        for cell in cells.chunks(nv) {
            for &[a, b] in local_edges {
                let (i, j) = (cell[a], cell[b]);
                edges.push([i.min(j), i.max(j)]);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let cell_edges: Vec<usize> = cells
            .chunks(nv)
            .flat_map(|cell| {
                local_edges.iter().map(|&[a, b]| {
                    let key = [cell[a].min(cell[b]), cell[a].max(cell[b])];
                    edges.binary_search(&key).expect("edge table is complete")
                })
            })
            .collect();

        let mut faces = Vec::new();
        let mut cell_faces = Vec::new();
        let mut face_edges = Vec::new();
        if dim == 3 {
            for cell in cells.chunks(nv) {
                for opp in 0..4 {
                    faces.push(sorted_face(cell, opp));
                }
            }
            faces.sort_unstable();
            faces.dedup();
            cell_faces = cells
                .chunks(nv)
                .flat_map(|cell| {
                    (0..4).map(|opp| {
                        faces
                            .binary_search(&sorted_face(cell, opp))
                            .expect("face table is complete")
                    })
                })
                .collect();
            face_edges = faces
                .iter()
                .map(|f| {
                    let e = |a: usize, b: usize| edges.binary_search(&[a, b]).expect("face edge");
                    [e(f[0], f[1]), e(f[0], f[2]), e(f[1], f[2])]
                })
                .collect();
        }

        let nfacets = if dim == 2 { edges.len() } else { faces.len() };
        let mut facet_cells = vec![[usize::MAX; 2]; nfacets];
        for c in 0..ncells {
            let local: &[usize] = if dim == 2 {
                &cell_edges[3 * c..3 * c + 3]
            } else {
                &cell_faces[4 * c..4 * c + 4]
            };
            for &f in local {
                let slot = &mut facet_cells[f];
                if slot[0] == usize::MAX {
                    slot[0] = c;
                } else if slot[1] == usize::MAX {
                    slot[1] = c;
                } else {
                    return Err(Error::InvalidMesh(format!("facet {f} shared by more than two cells")));
                }
            }
        }
        let boundary_facets: Vec<usize> =
            (0..nfacets).filter(|&f| facet_cells[f][1] == usize::MAX).collect();

        let mut mesh = Mesh {
            dim,
            nodes,
            cells,
            edges,
            faces,
            cell_edges,
            cell_faces,
            face_edges,
            facet_cells,
            boundary_facets,
            facet_labels: Vec::new(),
        };
        mesh.facet_labels = classify_boundary(&mesh)?;
        Ok(mesh)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of faces; zero for 2D meshes.
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Number of codimension-one entities (edges in 2D, faces in 3D).
    pub fn num_facets(&self) -> usize {
        self.facet_cells.len()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i][..self.dim]
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let nv = self.dim + 1;
        &self.cells[nv * c..nv * (c + 1)]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cells.chunks(self.dim + 1)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Global edge indices of cell `c`, in [`TRI_EDGES`] / [`TET_EDGES`] order.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        let ne = if self.dim == 2 { 3 } else { 6 };
        &self.cell_edges[ne * c..ne * (c + 1)]
    }

    /// Global face indices of tetrahedron `c`; entry `k` is the face opposite local vertex `k`.
    pub fn cell_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[4 * c..4 * c + 4]
    }

    /// Global facet indices of cell `c`; entry `k` is the facet opposite local vertex `k`.
    pub fn cell_facets(&self, c: usize) -> Vec<usize> {
        if self.dim == 3 {
            self.cell_faces(c).to_vec()
        } else {
            // local edges (0,1),(0,2),(1,2) are opposite vertices 2,1,0
            let e = self.cell_edges(c);
            vec![e[2], e[1], e[0]]
        }
    }

    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    /// Sign of local edge `(a, b)` of a cell relative to the global ascending orientation.
    pub fn local_edge_sign(&self, c: usize, local: usize) -> f64 {
        let cell = self.cell(c);
        let [a, b] = if self.dim == 2 { TRI_EDGES[local] } else { TET_EDGES[local] };
        if cell[a] < cell[b] {
            1.0
        } else {
            -1.0
        }
    }

    /// Node indices of facet `f` (ascending).
    pub fn facet_nodes(&self, f: usize) -> &[usize] {
        if self.dim == 2 {
            &self.edges[f]
        } else {
            &self.faces[f]
        }
    }

    /// Cells adjacent to facet `f`; boundary facets have one.
    pub fn facet_cells(&self, f: usize) -> Vec<usize> {
        self.facet_cells[f].iter().copied().filter(|&c| c != usize::MAX).collect()
    }

    pub fn boundary_facets(&self) -> &[usize] {
        &self.boundary_facets
    }

    /// Labels of the boundary facets, aligned with [`Mesh::boundary_facets`].
    pub fn facet_labels(&self) -> &[BoundaryLabel] {
        &self.facet_labels
    }

    pub fn facet_label(&self, f: usize) -> Option<BoundaryLabel> {
        self.boundary_facets
            .binary_search(&f)
            .ok()
            .map(|i| self.facet_labels[i])
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.facet_cells[f][1] == usize::MAX
    }

    /// Signed volume (area in 2D) of cell `c`.
    pub fn cell_volume(&self, c: usize) -> f64 {
        signed_volume(self.dim, &self.nodes, self.cell(c))
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn cell_barycenter(&self, c: usize) -> [f64; 3] {
        let cell = self.cell(c);
        let mut b = [0.0; 3];
        for &v in cell {
            for k in 0..3 {
                b[k] += self.nodes[v][k];
            }
        }
        b.map(|x| x / cell.len() as f64)
    }

    /// Nodes lying on the boundary.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut on = vec![false; self.num_nodes()];
        for &f in &self.boundary_facets {
            for &v in self.facet_nodes(f) {
                on[v] = true;
            }
        }
        (0..on.len()).filter(|&i| on[i]).collect()
    }

    /// Copy of the mesh with all coordinates multiplied by `r`.
    pub fn scaled(&self, r: f64) -> Mesh {
        let mut m = self.clone();
        for p in &mut m.nodes {
            for x in p.iter_mut() {
                *x *= r;
            }
        }
        m
    }

    /// Removes every cell whose barycenter lies inside the open box
    /// `(lo, +inf)^dim` and renumbers the remaining nodes in their original order.
    fn remove_corner(dim: usize, nodes: Vec<[f64; 3]>, cells: Vec<usize>, corner: [bool; 3]) -> Result<Mesh> {
        let nv = dim + 1;
        let kept: Vec<usize> = cells
            .chunks(nv)
            .filter(|cell| {
                let mut bc = [0.0; 3];
                for &v in cell.iter() {
                    for k in 0..dim {
                        bc[k] += nodes[v][k] / nv as f64;
                    }
                }
                !(0..dim).all(|k| (bc[k] > 0.5) == corner[k])
            })
            .flatten()
            .copied()
            .collect();
        let mut used = vec![usize::MAX; nodes.len()];
        for &v in &kept {
            used[v] = 0;
        }
        let mut new_nodes = Vec::new();
        for (i, slot) in used.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = new_nodes.len();
                new_nodes.push(nodes[i]);
            }
        }
        let cells = kept.into_iter().map(|v| used[v]).collect();
        Mesh::from_cells(dim, new_nodes, cells)
    }
}

fn sorted_face(cell: &[usize], opp: usize) -> [usize; 3] {
    let mut f = [0; 3];
    let mut k = 0;
    for (i, &v) in cell.iter().enumerate() {
        if i != opp {
            f[k] = v;
            k += 1;
        }
    }
    f.sort_unstable();
    f
}

fn signed_volume(dim: usize, nodes: &[[f64; 3]], cell: &[usize]) -> f64 {
    let p0 = nodes[cell[0]];
    let d = |v: usize, k: usize| nodes[cell[v]][k] - p0[k];
    if dim == 2 {
        0.5 * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0))
    } else {
        let det = d(1, 0) * (d(2, 1) * d(3, 2) - d(2, 2) * d(3, 1))
            - d(1, 1) * (d(2, 0) * d(3, 2) - d(2, 2) * d(3, 0))
            + d(1, 2) * (d(2, 0) * d(3, 1) - d(2, 1) * d(3, 0));
        det / 6.0
    }
}

fn check_level(level: u32) -> Result<usize> {
    if level == 0 || level > 12 {
        return Err(Error::InvalidLevel(level));
    }
    Ok(1usize << (level + 1))
}

fn square_grid(n: usize) -> (Vec<[f64; 3]>, Vec<usize>) {
    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v01, v11) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            cells.extend_from_slice(&[v00, v10, v11]);
            cells.extend_from_slice(&[v00, v11, v01]);
        }
    }
    (nodes, cells)
}

/// Kuhn permutations: each tetrahedron walks from (0,0,0) to (1,1,1) along the axes.
const KUHN_PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn cube_grid(n: usize) -> (Vec<[f64; 3]>, Vec<usize>) {
    let h = 1.0 / n as f64;
    let m = n + 1;
    let mut nodes = Vec::with_capacity(m * m * m);
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                nodes.push([i as f64 * h, j as f64 * h, k as f64 * h]);
            }
        }
    }
    let id = |p: [usize; 3]| (p[2] * m + p[1]) * m + p[0];
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for path in KUHN_PATHS {
                    let mut p = [i, j, k];
                    cells.push(id(p));
                    for axis in path {
                        p[axis] += 1;
                        cells.push(id(p));
                    }
                }
            }
        }
    }
    (nodes, cells)
}

/// Uniform triangulation of the unit square with `2^(level+1)` cells per side;
/// every grid square is split along its lower-left to upper-right diagonal.
pub fn build_unit_square(level: u32) -> Result<Mesh> {
    let n = check_level(level)?;
    let (nodes, cells) = square_grid(n);
    Mesh::from_cells(2, nodes, cells)
}

/// Kuhn (Freudenthal) triangulation of the unit cube with `2^(level+1)` cells per side.
pub fn build_unit_cube(level: u32) -> Result<Mesh> {
    let n = check_level(level)?;
    let (nodes, cells) = cube_grid(n);
    Mesh::from_cells(3, nodes, cells)
}

/// Unit square mesh with the cells of the quadrant `[1/2,1)^2` removed.
pub fn build_lshape(level: u32) -> Result<Mesh> {
    let n = check_level(level)?;
    let (nodes, cells) = square_grid(n);
    Mesh::remove_corner(2, nodes, cells, [true; 3])
}

/// Unit cube mesh with the cells of the octant `(0,1/2)x(1/2,1)x(1/2,1)` removed.
/// This octant is not crossed by the Kuhn main diagonal.
pub fn build_fichera(level: u32) -> Result<Mesh> {
    let n = check_level(level)?;
    let (nodes, cells) = cube_grid(n);
    Mesh::remove_corner(3, nodes, cells, FICHERA_CORNER)
}

const FICHERA_CORNER: [bool; 3] = [false, true, true];

/// Unit square or cube mesh with one quadrant or octant removed; `corner[k]`
/// selects the upper half along axis `k`.
pub fn build_box_minus_corner(dim: usize, level: u32, corner: [bool; 3]) -> Result<Mesh> {
    let n = check_level(level)?;
    let (nodes, cells) = if dim == 2 { square_grid(n) } else { cube_grid(n) };
    Mesh::remove_corner(dim, nodes, cells, corner)
}

/// Labels every boundary facet by the axis direction of its outward normal.
///
/// Works for any union of grid-aligned boxes: re-entrant facets get the label
/// of the outer face sharing their outward normal.
pub fn classify_boundary(mesh: &Mesh) -> Result<Vec<BoundaryLabel>> {
    let dim = mesh.dim;
    let tol = 1e-12;
    mesh.boundary_facets
        .iter()
        .map(|&f| {
            let fnodes = mesh.facet_nodes(f);
            let p0 = mesh.nodes[fnodes[0]];
            let axis = (0..dim)
                .find(|&k| fnodes.iter().all(|&v| (mesh.nodes[v][k] - p0[k]).abs() <= tol))
                .ok_or(Error::NonAxisFacet(f))?;
            let c = mesh.facet_cells[f][0];
            let opp = mesh
                .cell(c)
                .iter()
                .copied()
                .find(|v| !fnodes.contains(v))
                .expect("cell has a vertex off the facet");
            let positive = p0[axis] > mesh.nodes[opp][axis];
            Ok(BoundaryLabel::from_normal(dim, axis, positive).expect("valid axis"))
        })
        .collect()
}

/// A choice of the boundary part carrying homogeneous tangential conditions,
/// with the induced constrained entity sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundarySelection {
    labels: Option<Vec<BoundaryLabel>>,
    constrained_facets: Vec<usize>,
    constrained_nodes: Vec<usize>,
    constrained_edges: Vec<usize>,
    num_nodes: usize,
    num_edges: usize,
    num_facets: usize,
}

impl BoundarySelection {
    /// Selects all boundary facets carrying one of `labels`.
    pub fn from_labels(mesh: &Mesh, labels: &[BoundaryLabel]) -> Result<Self> {
        for l in labels {
            if l.axis_side(mesh.dim).is_none() {
                return Err(Error::UnknownLabel(format!("{l} (dim {})", mesh.dim)));
            }
        }
        let facets: Vec<usize> = mesh
            .boundary_facets
            .iter()
            .zip(&mesh.facet_labels)
            .filter(|(_, l)| labels.contains(l))
            .map(|(&f, _)| f)
            .collect();
        let mut sel = Self::from_facets(mesh, &facets)?;
        let mut ls = labels.to_vec();
        ls.sort();
        ls.dedup();
        sel.labels = Some(ls);
        Ok(sel)
    }

    /// Selects an explicit set of boundary facets.
    pub fn from_facets(mesh: &Mesh, facets: &[usize]) -> Result<Self> {
        let mut facets = facets.to_vec();
        facets.sort_unstable();
        facets.dedup();
        if let Some(&bad) = facets
            .iter()
            .find(|&&f| f >= mesh.num_facets() || !mesh.is_boundary_facet(f))
        {
            return Err(Error::NotBoundaryFacet(bad));
        }
        let mut node_on = vec![false; mesh.num_nodes()];
        let mut edge_on = vec![false; mesh.num_edges()];
        for &f in &facets {
            for &v in mesh.facet_nodes(f) {
                node_on[v] = true;
            }
            if mesh.dim == 2 {
                edge_on[f] = true;
            } else {
                for e in mesh.face_edges(f) {
                    edge_on[e] = true;
                }
            }
        }
        let collect = |v: &[bool]| (0..v.len()).filter(|&i| v[i]).collect::<Vec<_>>();
        Ok(BoundarySelection {
            labels: None,
            constrained_nodes: collect(&node_on),
            constrained_edges: collect(&edge_on),
            constrained_facets: facets,
            num_nodes: mesh.num_nodes(),
            num_edges: mesh.num_edges(),
            num_facets: mesh.num_facets(),
        })
    }

    /// Selection of the complementary boundary part.
    pub fn complement(&self, mesh: &Mesh) -> Result<Self> {
        let facets: Vec<usize> = mesh
            .boundary_facets
            .iter()
            .copied()
            .filter(|f| self.constrained_facets.binary_search(f).is_err())
            .collect();
        let mut sel = Self::from_facets(mesh, &facets)?;
        if let Some(ls) = &self.labels {
            sel.labels = Some(
                BoundaryLabel::all(mesh.dim)
                    .iter()
                    .copied()
                    .filter(|l| !ls.contains(l))
                    .collect(),
            );
        }
        Ok(sel)
    }

    pub fn labels(&self) -> Option<&[BoundaryLabel]> {
        self.labels.as_deref()
    }

    pub fn constrained_facets(&self) -> &[usize] {
        &self.constrained_facets
    }

    pub fn constrained_nodes(&self) -> &[usize] {
        &self.constrained_nodes
    }

    pub fn constrained_edges(&self) -> &[usize] {
        &self.constrained_edges
    }

    pub fn is_empty(&self) -> bool {
        self.constrained_facets.is_empty()
    }

    /// Whether this selection was built for a mesh with `mesh`'s entity counts.
    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.num_nodes == mesh.num_nodes()
            && self.num_edges == mesh.num_edges()
            && self.num_facets == mesh.num_facets()
    }
}

/// Convenience wrapper for [`BoundarySelection::from_labels`].
pub fn select_boundary(mesh: &Mesh, labels: &[BoundaryLabel]) -> Result<BoundarySelection> {
    BoundarySelection::from_labels(mesh, labels)
}

/// Orders the boundary facets by breadth-first search over facet adjacency
/// (shared node in 2D, shared edge in 3D), starting at `seed`. Neighbours are
/// visited in ascending index order; unreachable components follow, each
/// started from its smallest facet index.
pub fn bfs_boundary_order(mesh: &Mesh, seed: usize) -> Result<Vec<usize>> {
    if seed >= mesh.num_facets() || !mesh.is_boundary_facet(seed) {
        return Err(Error::NotBoundaryFacet(seed));
    }
    let bf = &mesh.boundary_facets;
    let nb = bf.len();
    // shared sub-entity -> boundary facets (positions in `bf`)
    let keys = |f: usize| -> Vec<usize> {
        if mesh.dim == 2 {
            mesh.edges[f].to_vec()
        } else {
            mesh.face_edges[f].to_vec()
        }
    };
    let nkeys = if mesh.dim == 2 { mesh.num_nodes() } else { mesh.num_edges() };
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nkeys];
    for (pos, &f) in bf.iter().enumerate() {
        for k in keys(f) {
            incident[k].push(pos);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nb];
    for (pos, &f) in bf.iter().enumerate() {
        let mut nbrs: Vec<usize> = keys(f)
            .into_iter()
            .flat_map(|k| incident[k].iter().copied())
            .filter(|&q| q != pos)
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        adj[pos] = nbrs;
    }

    let mut visited = vec![false; nb];
    let mut order = Vec::with_capacity(nb);
    let start = bf.binary_search(&seed).expect("seed is a boundary facet");
    let mut starts = std::iter::once(start).chain(0..nb);
    while order.len() < nb {
        let s = loop {
            let s = starts.next().expect("unvisited facet remains");
            if !visited[s] {
                break s;
            }
        };
        let mut queue = VecDeque::from([s]);
        visited[s] = true;
        while let Some(p) = queue.pop_front() {
            order.push(bf[p]);
            for &q in &adj[p] {
                if !visited[q] {
                    visited[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    Ok(order)
}
