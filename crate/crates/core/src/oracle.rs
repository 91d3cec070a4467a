//! Closed-form smallest positive eigenvalues on the unit interval, square and
//! cube under mixed boundary conditions on whole faces.
//!
//! Values are kept exactly as `lambda = (pi/2) * sqrt(four_q)` with integer
//! `four_q`. Two independent sources are provided: an enumerator over
//! separated-variable eigenfunctions and a table of reference equivalence
//! classes closed under the symmetries of the box.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::BoundaryLabel;

/// End condition of a one-dimensional factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndBc {
    Dirichlet,
    Neumann,
}

/// End conditions of one coordinate factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AxisBc {
    pub left: EndBc,
    pub right: EndBc,
}

impl AxisBc {
    /// Frequencies in units of `pi/2` in ascending order, `count` of them.
    pub fn half_frequencies(self, count: usize) -> Vec<u32> {
        use EndBc::*;
        match (self.left, self.right) {
            (Dirichlet, Dirichlet) => (1..=count as u32).map(|n| 2 * n).collect(),
            (Neumann, Neumann) => (0..count as u32).map(|n| 2 * n).collect(),
            _ => (1..=count as u32).map(|n| 2 * n - 1).collect(),
        }
    }
}

/// Assignment of the `2 * dim` faces of the unit box to `gamma_tau`.
/// Bit `2a` is the face `x_a = 0`, bit `2a + 1` the face `x_a = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxBc {
    dim: usize,
    mask: u8,
}

impl BoxBc {
    pub fn new(dim: usize, mask: u8) -> Result<Self> {
        if !(1..=3).contains(&dim) || (mask as u32) >= (1u32 << (2 * dim)) {
            return Err(Error::OracleTable(format!("invalid face mask {mask:#b} in dimension {dim}")));
        }
        Ok(BoxBc { dim, mask })
    }

    pub fn dim(self) -> usize {
        self.dim
    }

    pub fn mask(self) -> u8 {
        self.mask
    }

    pub fn all(dim: usize) -> impl Iterator<Item = BoxBc> {
        (0..1u16 << (2 * dim)).map(move |m| BoxBc { dim, mask: m as u8 })
    }

    pub fn contains(self, axis: usize, upper: bool) -> bool {
        self.mask & (1 << (2 * axis + upper as usize)) != 0
    }

    pub fn complement(self) -> BoxBc {
        BoxBc {
            dim: self.dim,
            mask: !self.mask & ((1u16 << (2 * self.dim)) - 1) as u8,
        }
    }

    pub fn is_subset_of(self, other: BoxBc) -> bool {
        self.mask & !other.mask == 0
    }

    /// Builds the face set from mesh boundary labels (dimension 2 or 3).
    pub fn from_labels(dim: usize, labels: &[BoundaryLabel]) -> Result<Self> {
        let mut mask = 0u8;
        for l in labels {
            let (axis, upper) = l
                .axis_side(dim)
                .ok_or_else(|| Error::UnknownLabel(format!("{l} in dimension {dim}")))?;
            mask |= 1 << (2 * axis + upper as usize);
        }
        BoxBc::new(dim, mask)
    }

    /// Parses a comma list of face names: labels in 2D/3D, `0`/`1` in 1D.
    pub fn parse(dim: usize, s: &str) -> Result<Self> {
        if dim == 1 {
            let mut mask = 0u8;
            for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                mask |= match part {
                    "0" => 1,
                    "1" => 2,
                    "none" => 0,
                    "all" => 3,
                    other => return Err(Error::UnknownLabel(other.to_string())),
                };
            }
            return BoxBc::new(1, mask);
        }
        BoxBc::from_labels(dim, &BoundaryLabel::parse_list(s, dim)?)
    }

    /// Image under an axis permutation followed by per-axis reflections.
    fn transformed(self, perm: &[usize], flip: &[bool]) -> BoxBc {
        let mut mask = 0u8;
        for axis in 0..self.dim {
            for upper in [false, true] {
                if self.contains(axis, upper) {
                    let to = perm[axis];
                    let side = upper ^ flip[to];
                    mask |= 1 << (2 * to + side as usize);
                }
            }
        }
        BoxBc { dim: self.dim, mask }
    }

    /// Orbit under the hyperoctahedral group (`2^d d!` elements).
    pub fn orbit(self) -> Vec<BoxBc> {
        let mut out = Vec::new();
        for perm in permutations(self.dim) {
            for bits in 0..1u8 << self.dim {
                let flip: Vec<bool> = (0..self.dim).map(|a| bits & (1 << a) != 0).collect();
                out.push(self.transformed(&perm, &flip));
            }
        }
        out
    }

    fn axis_bc(self, axis: usize, tau_end: EndBc, nu_end: EndBc) -> AxisBc {
        let end = |upper| if self.contains(axis, upper) { tau_end } else { nu_end };
        AxisBc {
            left: end(false),
            right: end(true),
        }
    }
}

impl fmt::Display for BoxBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 1 {
            let names: Vec<&str> = [(0, "0"), (1, "1")]
                .iter()
                .filter(|(b, _)| self.mask & (1 << b) != 0)
                .map(|&(_, n)| n)
                .collect();
            return if names.is_empty() {
                f.write_str("none")
            } else {
                f.write_str(&names.join(","))
            };
        }
        let labels: Vec<BoundaryLabel> = BoundaryLabel::all(self.dim)
            .iter()
            .copied()
            .filter(|l| {
                let (axis, upper) = l.axis_side(self.dim).expect("label of this dimension");
                self.contains(axis, upper)
            })
            .collect();
        f.write_str(&crate::mesh::format_labels(&labels))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exact value `lambda = (pi/2) * sqrt(four_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exact {
    pub four_q: u32,
}

impl Exact {
    pub fn lambda(self) -> f64 {
        0.5 * PI * (self.four_q as f64).sqrt()
    }

    pub fn lambda_sq(self) -> f64 {
        0.25 * PI * PI * self.four_q as f64
    }

    pub fn constant(self) -> f64 {
        1.0 / self.lambda()
    }

    /// `sqrt(four_q) = outer * sqrt(radicand)` with square-free radicand.
    fn split_root(self) -> (u32, u32) {
        let mut outer = 1;
        let mut rad = self.four_q;
        let mut p = 2;
        while p * p <= rad {
            while rad % (p * p) == 0 {
                rad /= p * p;
                outer *= p;
            }
            p += 1;
        }
        (outer, rad)
    }

    /// `lambda = (num * sqrt(rad) / den) * pi` in lowest terms.
    fn parts(self) -> (u32, u32, u32) {
        let (outer, rad) = self.split_root();
        let g = gcd(outer, 2);
        (outer / g, rad, 2 / g)
    }

    /// Symbolic form of `lambda`, e.g. `(√5/2)π`.
    pub fn lambda_symbolic(self) -> String {
        let (num, rad, den) = self.parts();
        let root = if rad == 1 { String::new() } else { format!("√{rad}") };
        let head = match (num, rad) {
            (1, 1) => String::new(),
            (1, _) => root.clone(),
            (n, _) => format!("{n}{root}"),
        };
        match den {
            1 => format!("{head}π"),
            d if rad == 1 && num == 1 => format!("π/{d}"),
            d if rad == 1 => format!("{num}π/{d}"),
            d => format!("({head}/{d})π"),
        }
    }

    /// Symbolic form of `c = 1/lambda`, e.g. `2/(√5π)`.
    pub fn constant_symbolic(self) -> String {
        let (num, rad, den) = self.parts();
        let root = if rad == 1 { String::new() } else { format!("√{rad}") };
        let bottom = match (num, rad) {
            (1, 1) => "π".to_string(),
            (1, _) => format!("({root}π)"),
            (n, _) => format!("({n}{root}π)"),
        };
        format!("{den}/{bottom}")
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lambda_symbolic())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Per-axis frequency bound of the enumerator.
const MAX_INDEX: usize = 3;

/// Minimum of `sum mu_i^2` over tuples of per-axis frequencies, skipping
/// tuples rejected by `admissible`.
fn min_sum_of_squares(axes: &[AxisBc], admissible: impl Fn(&[u32]) -> bool) -> Option<u32> {
    let freqs: Vec<Vec<u32>> = axes.iter().map(|a| a.half_frequencies(MAX_INDEX)).collect();
    let mut best: Option<u32> = None;
    let mut idx = vec![0usize; axes.len()];
    loop {
        let tuple: Vec<u32> = idx.iter().zip(&freqs).map(|(&i, f)| f[i]).collect();
        if admissible(&tuple) {
            let s = tuple.iter().map(|m| m * m).sum();
            best = Some(best.map_or(s, |b: u32| b.min(s)));
        }
        let mut a = 0;
        while a < idx.len() {
            idx[a] += 1;
            if idx[a] < MAX_INDEX {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
        if a == idx.len() {
            return best;
        }
    }
}

/// Smallest positive Laplace eigenvalue: faces in `gamma_tau` are Dirichlet,
/// the others Neumann.
pub fn exact_lambda0(bc: BoxBc) -> Exact {
    let axes: Vec<AxisBc> = (0..bc.dim)
        .map(|a| bc.axis_bc(a, EndBc::Dirichlet, EndBc::Neumann))
        .collect();
    let four_q = min_sum_of_squares(&axes, |t| t.iter().any(|&m| m != 0)).expect("nonempty enumeration");
    Exact { four_q }
}

/// Smallest positive Maxwell eigenvalue on the cube from the ansatz
/// `E = rot(u e_a)` with longitudinal axis `a`, for both `gamma_tau` and its
/// complement.
pub fn exact_lambda1_3d(bc: BoxBc) -> Result<Exact> {
    if bc.dim != 3 {
        return Err(Error::OracleTable(format!("Maxwell oracle needs dimension 3, got {}", bc.dim)));
    }
    let mut best = u32::MAX;
    for set in [bc, bc.complement()] {
        for long in 0..3 {
            let axes: Vec<AxisBc> = (0..3)
                .map(|a| {
                    if a == long {
                        set.axis_bc(a, EndBc::Dirichlet, EndBc::Neumann)
                    } else {
                        set.axis_bc(a, EndBc::Neumann, EndBc::Dirichlet)
                    }
                })
                .collect();
            let admissible = |t: &[u32]| (0..3).any(|a| a != long && t[a] != 0);
            if let Some(v) = min_sum_of_squares(&axes, admissible) {
                best = best.min(v);
            }
        }
    }
    Ok(Exact { four_q: best })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    Lambda0In1d,
    Lambda0In2d,
    Lambda0In3d,
    Lambda1In3d,
}

impl TableKind {
    pub fn dim(self) -> usize {
        match self {
            TableKind::Lambda0In1d => 1,
            TableKind::Lambda0In2d => 2,
            TableKind::Lambda0In3d | TableKind::Lambda1In3d => 3,
        }
    }

    /// Reference equivalence classes as `(constant expression, members)`.
    /// Each class lists its face sets as they are printed, with the stated
    /// constant as `four_q`.
    fn classes(self) -> &'static [(u32, &'static [&'static str])] {
        match self {
            TableKind::Lambda0In1d => &[(4, &["", "0,1"]), (1, &["0", "1"])],
            TableKind::Lambda0In2d => &[
                (4, &[""]),
                (2, &["b,l", "b,r", "t,l", "t,r"]),
                (1, &["b", "t", "l", "r"]),
                (5, &["b,l,r", "t,l,r", "b,t,l", "b,t,r"]),
                (4, &["b,t", "l,r"]),
                (8, &["b,t,l,r"]),
            ],
            TableKind::Lambda0In3d => &[
                (4, &[""]),
                (1, &["b", "t", "l", "r", "f", "k"]),
                (4, &["b,t", "l,r", "f,k"]),
                (
                    2,
                    &[
                        "b,l", "b,r", "b,f", "b,k", "t,l", "t,r", "t,f", "t,k", "f,l", "f,r", "k,l", "k,r",
                    ],
                ),
                (
                    5,
                    &[
                        "b,t,l", "b,t,r", "b,t,f", "b,t,k", "l,r,b", "l,r,t", "l,r,f", "l,r,k", "f,k,l", "f,k,r",
                        "f,k,b", "f,k,t",
                    ],
                ),
                (3, &["b,k,l", "b,l,f", "b,f,r", "b,r,k", "t,k,l", "t,l,f", "t,f,r", "t,r,k"]),
                (8, &["b,t,l,r", "b,t,f,k", "l,r,f,k"]),
                (
                    6,
                    &[
                        "b,t,l,k", "b,t,f,l", "b,t,r,f", "b,t,r,k", "l,r,f,t", "l,r,f,b", "l,r,t,k", "l,r,b,k",
                        "f,k,b,l", "f,k,t,l", "f,k,b,r", "f,k,t,r",
                    ],
                ),
                (9, &["b,t,l,r,k", "b,t,l,r,f", "b,t,l,f,k", "b,t,r,f,k", "b,l,r,f,k", "t,l,r,f,k"]),
                (12, &["b,t,l,r,f,k"]),
            ],
            TableKind::Lambda1In3d => &[
                (8, &["", "b,t,l,r,f,k"]),
                (5, &["b", "t", "l", "r", "f", "k"]),
                (4, &["l,r", "b,t", "f,k"]),
                (
                    2,
                    &[
                        "b,l", "b,r", "b,f", "b,k", "t,l", "t,r", "t,f", "t,k", "f,l", "l,k", "k,r", "f,r",
                    ],
                ),
                (
                    1,
                    &[
                        "b,l,t", "b,r,t", "b,f,t", "b,k,t", "r,l,t", "r,l,b", "r,l,f", "r,l,k", "f,k,l", "f,k,r",
                        "f,k,t", "f,k,b",
                    ],
                ),
                (3, &["b,l,k", "b,r,k", "b,l,f", "b,r,f", "t,l,k", "t,r,k", "t,l,f", "t,r,f"]),
            ],
        }
    }

    fn closed_under_complement(self) -> bool {
        self == TableKind::Lambda1In3d
    }
}

/// Lookup table of reference values closed under the box symmetries (and,
/// for the Maxwell table, under complement).
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    kind: TableKind,
    values: HashMap<BoxBc, Exact>,
}

impl ReferenceTable {
    /// Builds the closure; fails if two classes claim one subset with
    /// different values or if some subset is not reached.
    pub fn build(kind: TableKind) -> Result<Self> {
        let dim = kind.dim();
        let mut values: HashMap<BoxBc, Exact> = HashMap::new();
        for &(four_q, members) in kind.classes() {
            let exact = Exact { four_q };
            for member in members {
                let seed = BoxBc::parse(dim, member)?;
                let mut images = seed.orbit();
                if kind.closed_under_complement() {
                    let comp: Vec<BoxBc> = images.iter().map(|b| b.complement()).collect();
                    images.extend(comp);
                }
                for image in images {
                    if let Some(prev) = values.insert(image, exact) {
                        if prev != exact {
                            return Err(Error::OracleTable(format!(
                                "face set {image} resolves to both {prev} and {exact}"
                            )));
                        }
                    }
                }
            }
        }
        if let Some(missing) = BoxBc::all(dim).find(|b| !values.contains_key(b)) {
            return Err(Error::OracleTable(format!("face set {{{missing}}} is not covered")));
        }
        Ok(ReferenceTable { kind, values })
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn lookup(&self, bc: BoxBc) -> Result<Exact> {
        if bc.dim != self.kind.dim() {
            return Err(Error::OracleTable(format!(
                "table is {}-dimensional, face set is {}-dimensional",
                self.kind.dim(),
                bc.dim
            )));
        }
        self.values
            .get(&bc)
            .copied()
            .ok_or_else(|| Error::OracleTable(format!("face set {{{bc}}} is not covered")))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One-shot table lookup.
pub fn reference_table_lambda(kind: TableKind, bc: BoxBc) -> Result<Exact> {
    ReferenceTable::build(kind)?.lookup(bc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bc(dim: usize, s: &str) -> BoxBc {
        BoxBc::parse(dim, s).unwrap()
    }

    #[test]
    fn enumerator_examples() {
        assert_eq!(exact_lambda0(bc(3, "")).lambda_symbolic(), "π");
        assert_eq!(exact_lambda0(bc(3, "b")).lambda_symbolic(), "π/2");
        assert_eq!(exact_lambda0(bc(3, "b,l,k")).lambda_symbolic(), "(√3/2)π");
        assert_eq!(exact_lambda0(bc(3, "all")).lambda_symbolic(), "√3π");
        assert_eq!(exact_lambda0(bc(2, "b,l,r")).lambda_symbolic(), "(√5/2)π");
        assert_eq!(exact_lambda0(bc(1, "0")).lambda_symbolic(), "π/2");
        assert_eq!(exact_lambda1_3d(bc(3, "")).unwrap().lambda_symbolic(), "√2π");
        assert_eq!(exact_lambda1_3d(bc(3, "all")).unwrap().lambda_symbolic(), "√2π");
        assert_eq!(exact_lambda1_3d(bc(3, "b")).unwrap().lambda_symbolic(), "(√5/2)π");
        assert_eq!(exact_lambda1_3d(bc(3, "b,l")).unwrap().lambda_symbolic(), "(√2/2)π");
        assert_eq!(exact_lambda1_3d(bc(3, "b,l,k")).unwrap().lambda_symbolic(), "(√3/2)π");
    }

    #[test]
    fn table_examples() {
        let e = reference_table_lambda(TableKind::Lambda0In3d, bc(3, "b,t,l,r,k")).unwrap();
        assert_eq!(e.lambda_symbolic(), "3π/2");
        assert_eq!(e.constant_symbolic(), "2/(3π)");
        assert!((e.constant() - 0.21220659).abs() < 5e-9);
        assert_eq!(reference_table_lambda(TableKind::Lambda0In2d, bc(2, "b,t")).unwrap().lambda_symbolic(), "π");
        assert_eq!(reference_table_lambda(TableKind::Lambda1In3d, bc(3, "l,r")).unwrap().constant_symbolic(), "1/π");
    }

    #[test]
    fn enumerator_agrees_with_tables() {
        for (kind, dim) in [
            (TableKind::Lambda0In1d, 1),
            (TableKind::Lambda0In2d, 2),
            (TableKind::Lambda0In3d, 3),
        ] {
            let table = ReferenceTable::build(kind).unwrap();
            assert_eq!(table.len(), 1 << (2 * dim));
            for b in BoxBc::all(dim) {
                assert_eq!(exact_lambda0(b), table.lookup(b).unwrap(), "{kind:?} {b}");
            }
        }
        let table = ReferenceTable::build(TableKind::Lambda1In3d).unwrap();
        for b in BoxBc::all(3) {
            assert_eq!(exact_lambda1_3d(b).unwrap(), table.lookup(b).unwrap(), "{b}");
        }
    }

    #[test]
    fn constant_symbols() {
        assert_eq!(Exact { four_q: 12 }.constant_symbolic(), "1/(√3π)");
        assert_eq!(Exact { four_q: 8 }.constant_symbolic(), "1/(√2π)");
        assert_eq!(Exact { four_q: 5 }.constant_symbolic(), "2/(√5π)");
        assert_eq!(Exact { four_q: 1 }.constant_symbolic(), "2/π");
        assert_eq!(Exact { four_q: 4 }.constant_symbolic(), "1/π");
        assert_eq!(Exact { four_q: 36 }.lambda_symbolic(), "3π");
    }

    #[test]
    fn orbit_sizes() {
        assert_eq!(bc(3, "b").orbit().len(), 48);
        let distinct: std::collections::HashSet<_> = bc(3, "b").orbit().into_iter().collect();
        assert_eq!(distinct.len(), 6);
        let distinct: std::collections::HashSet<_> = bc(3, "b,l,k").orbit().into_iter().collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn masks_round_trip_through_display() {
        for dim in 1..=3 {
            for b in BoxBc::all(dim) {
                let s = b.to_string();
                let s = if s.is_empty() { "none".to_string() } else { s };
                assert_eq!(BoxBc::parse(dim, &s).unwrap(), b);
            }
        }
    }
}
