//! End-to-end computation of the constants: convergence tables, boundary
//! sweeps and the checks performed on them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{
    smallest_positive_dense, smallest_positive_lowest_k, smallest_positive_projected,
    smallest_positive_shift_invert, Diagnostics, EigenConfig, EigenResult, SolverChoice,
};
use crate::error::{Error, Result};
use crate::fem::{assemble_mass, assemble_stiffness, restrict, FeSpace, SpaceKind};
use crate::mesh::{bfs_boundary_order, format_labels, BoundaryLabel, BoundarySelection, Domain, Mesh};
use crate::oracle::{exact_lambda0, exact_lambda1_3d, BoxBc, Exact};

/// Which constant: Poincaré–Friedrichs (`c0`), Maxwell (`c1`) or divergence (`c2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantKind {
    C0,
    C1,
    C2,
}

impl ConstantKind {
    pub fn space(self) -> SpaceKind {
        match self {
            ConstantKind::C0 => SpaceKind::P1,
            ConstantKind::C1 => SpaceKind::Nedelec,
            ConstantKind::C2 => SpaceKind::RaviartThomas,
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstantKind::C0 => "c0",
            ConstantKind::C1 => "c1",
            ConstantKind::C2 => "c2",
        })
    }
}

impl FromStr for ConstantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "c0" => Ok(ConstantKind::C0),
            "c1" => Ok(ConstantKind::C1),
            "c2" => Ok(ConstantKind::C2),
            other => Err(Error::Parse(format!("unknown constant kind `{other}`"))),
        }
    }
}

/// The boundary part whose DOFs are constrained, either whole labelled
/// sides or an explicit facet set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Labels(Vec<BoundaryLabel>),
    Facets(Vec<usize>),
}

impl Constraint {
    pub fn select(&self, mesh: &Mesh) -> Result<BoundarySelection> {
        match self {
            Constraint::Labels(l) => BoundarySelection::from_labels(mesh, l),
            Constraint::Facets(f) => BoundarySelection::from_facets(mesh, f),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Constraint::Labels(l) => format_labels(l),
            Constraint::Facets(f) => format!("{} facets", f.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub solver: SolverChoice,
    pub eigen: EigenConfig,
    /// The automatic policy uses the projected method up to this many free DOFs.
    pub projected_max_dofs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: SolverChoice::Auto,
            eigen: EigenConfig::default(),
            projected_max_dofs: 5000,
        }
    }
}

impl SolveOptions {
    pub fn with_solver(solver: SolverChoice) -> Self {
        SolveOptions {
            solver,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRecord {
    pub domain: String,
    pub level: u32,
    pub space: String,
    pub kind: ConstantKind,
    pub gamma: String,
    pub c: f64,
    pub lambda: f64,
    pub diagnostics: Diagnostics,
    /// Coefficients in the original DOF numbering, zero on constrained DOFs.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

/// Shift guess that needs no prior solve: the smallest positive diagonal
/// Rayleigh quotient, which bounds the lowest nonzero eigenvalue from above
/// when the kernel is trivial.
fn diagonal_guess(k: &crate::sparse::SparseSymMatrix, m: &crate::sparse::SparseSymMatrix) -> f64 {
    (0..k.n())
        .map(|i| k.get(i, i) / m.get(i, i))
        .filter(|r| *r > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// Solves the restricted pencil of `kind` on `mesh` and returns the result
/// with the eigenvector lifted to all DOFs.
pub fn solve_on_mesh(
    mesh: &Mesh,
    kind: ConstantKind,
    selection: &BoundarySelection,
    opts: &SolveOptions,
    guess: Option<f64>,
) -> Result<EigenResult> {
    let space = FeSpace::new(kind.space(), mesh);
    let (k, free) = restrict(&assemble_stiffness(space)?, space, selection)?;
    let (m, _) = restrict(&assemble_mass(space)?, space, selection)?;
    let cfg = &opts.eigen;
    let shift = |k: &_, m: &_| {
        let g = guess.filter(|g| *g > 0.0).unwrap_or_else(|| diagonal_guess(k, m));
        smallest_positive_shift_invert(k, m, g, None, cfg)
    };
    let mut res = match opts.solver {
        SolverChoice::Dense => smallest_positive_dense(&k, &m, cfg)?,
        SolverChoice::Projected => smallest_positive_projected(&k, &m, cfg)?,
        SolverChoice::Shift => shift(&k, &m)?,
        SolverChoice::Auto if k.n() <= opts.projected_max_dofs => smallest_positive_projected(&k, &m, cfg)?,
        SolverChoice::Auto => {
            let p1_kernel = usize::from(selection.constrained_nodes().is_empty());
            let first = if kind == ConstantKind::C0 {
                smallest_positive_lowest_k(&k, &m, p1_kernel, cfg)
            } else {
                shift(&k, &m)
            };
            match first {
                Ok(r) => r,
                Err(e) if e.is_solver_failure() => {
                    if kind == ConstantKind::C0 {
                        shift(&k, &m)?
                    } else if k.n() <= 4 * opts.projected_max_dofs {
                        smallest_positive_projected(&k, &m, cfg)?
                    } else {
                        return Err(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    };
    res.eigenvector = res.lifted(&free, space.ndofs());
    Ok(res)
}

fn record(
    domain: &str,
    level: u32,
    kind: ConstantKind,
    gamma: String,
    res: EigenResult,
) -> ConstantRecord {
    ConstantRecord {
        domain: domain.to_string(),
        level,
        space: kind.space().to_string(),
        kind,
        gamma,
        c: 1.0 / res.lambda,
        lambda: res.lambda,
        diagnostics: res.diagnostics(),
        eigenvector: res.eigenvector,
    }
}

fn needs_shift_guess(mesh: &Mesh, kind: ConstantKind, opts: &SolveOptions) -> bool {
    let n = FeSpace::new(kind.space(), mesh).ndofs();
    match opts.solver {
        SolverChoice::Shift => true,
        SolverChoice::Auto => kind != ConstantKind::C0 && n > opts.projected_max_dofs,
        _ => false,
    }
}

/// Computes one constant. Shift-invert solves are seeded with the eigenvalue
/// of the next coarser level when the constraint is given by labels.
pub fn compute_constant(
    domain: Domain,
    level: u32,
    kind: ConstantKind,
    constraint: &Constraint,
    opts: &SolveOptions,
) -> Result<ConstantRecord> {
    let mesh = domain.build(level)?;
    let guess = if level > 1 && needs_shift_guess(&mesh, kind, opts) && matches!(constraint, Constraint::Labels(_)) {
        let coarse_opts = SolveOptions {
            solver: SolverChoice::Auto,
            ..*opts
        };
        Some(compute_constant(domain, level - 1, kind, constraint, &coarse_opts)?.lambda.powi(2))
    } else {
        None
    };
    compute_on_mesh(&mesh, domain.name(), level, kind, constraint, opts, guess)
}

/// Like [`compute_constant`] on a prebuilt (possibly transformed) mesh.
pub fn compute_on_mesh(
    mesh: &Mesh,
    domain_name: &str,
    level: u32,
    kind: ConstantKind,
    constraint: &Constraint,
    opts: &SolveOptions,
    guess: Option<f64>,
) -> Result<ConstantRecord> {
    let selection = constraint.select(mesh)?;
    let res = solve_on_mesh(mesh, kind, &selection, opts, guess).map_err(|e| {
        e.context(format!(
            "{kind} on {domain_name} level {level} with constrained part {}",
            constraint.describe()
        ))
    })?;
    Ok(record(domain_name, level, kind, constraint.describe(), res))
}

/// Boundary scenario of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `gamma_tau` in {empty, whole boundary}.
    Full,
    /// `gamma_tau` in {bottom side, all other sides}.
    Mixed,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Scenario::Full),
            "mixed" | "mixed_b" | "mixed-b" => Ok(Scenario::Mixed),
            other => Err(Error::Parse(format!("unknown scenario `{other}`"))),
        }
    }
}

/// One table column: a constant with its constrained side labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub kind: ConstantKind,
    pub labels: Vec<BoundaryLabel>,
}

impl Column {
    pub fn header(&self) -> String {
        let set = if self.labels.is_empty() {
            "none".to_string()
        } else {
            self.labels.iter().map(|l| l.to_string()).collect::<String>()
        };
        format!("{}_{}_{}", self.kind, set, self.kind.space())
    }

    /// Continuum limit on the unit square or cube.
    pub fn exact_limit(&self, dim: usize) -> Result<Exact> {
        let bc = BoxBc::from_labels(dim, &self.labels)?;
        Ok(match (self.kind, dim) {
            (ConstantKind::C0, _) => exact_lambda0(bc),
            (ConstantKind::C2, _) => exact_lambda0(bc.complement()),
            (ConstantKind::C1, 2) => exact_lambda0(bc.complement()),
            (ConstantKind::C1, _) => exact_lambda1_3d(bc)?,
        })
    }
}

/// The six columns of a table, in the order
/// `c0 S, c2 S', c1 S', c1 S, c2 S, c0 S'` with `S'` the complement of `S`.
pub fn scenario_columns(dim: usize, scenario: Scenario) -> Vec<Column> {
    let all = BoundaryLabel::all(dim).to_vec();
    let (s, rest) = match scenario {
        Scenario::Full => (Vec::new(), all),
        Scenario::Mixed => (
            vec![BoundaryLabel::B],
            all.into_iter().filter(|l| *l != BoundaryLabel::B).collect(),
        ),
    };
    use ConstantKind::*;
    [(C0, &s), (C2, &rest), (C1, &rest), (C1, &s), (C2, &s), (C0, &rest)]
        .into_iter()
        .map(|(kind, labels)| Column {
            kind,
            labels: labels.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub level: u32,
    pub values: Vec<f64>,
    pub diagnostics: Vec<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub domain: String,
    pub scenario: Scenario,
    pub columns: Vec<Column>,
    pub rows: Vec<TableRow>,
    /// Continuum values where a closed form exists.
    pub limits: Option<Vec<f64>>,
}

impl ConvergenceTable {
    /// Observed orders `log2(e_L / e_{L+1})` per consecutive level pair and
    /// column, with `e` the distance to the limit, or Richardson estimates
    /// from three consecutive levels when no limit is known.
    pub fn orders(&self) -> Vec<Vec<Option<f64>>> {
        let ncols = self.columns.len();
        match &self.limits {
            Some(lim) => self
                .rows
                .windows(2)
                .map(|w| {
                    (0..ncols)
                        .map(|j| {
                            let e0 = (w[0].values[j] - lim[j]).abs();
                            let e1 = (w[1].values[j] - lim[j]).abs();
                            (e0 > 0.0 && e1 > 0.0).then(|| (e0 / e1).log2())
                        })
                        .collect()
                })
                .collect(),
            None => self
                .rows
                .windows(3)
                .map(|w| {
                    (0..ncols)
                        .map(|j| {
                            let d0 = (w[1].values[j] - w[0].values[j]).abs();
                            let d1 = (w[2].values[j] - w[1].values[j]).abs();
                            (d0 > 0.0 && d1 > 0.0).then(|| (d0 / d1).log2())
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Computes the six constants of `scenario` for `levels`; each fine-level
/// shift-invert solve is seeded with the previous level's eigenvalue.
pub fn convergence_table(
    domain: Domain,
    levels: std::ops::RangeInclusive<u32>,
    scenario: Scenario,
    opts: &SolveOptions,
) -> Result<ConvergenceTable> {
    let dim = domain.dim();
    let columns = scenario_columns(dim, scenario);
    let mut rows: Vec<TableRow> = Vec::new();
    let mut guesses: Vec<Option<f64>> = vec![None; columns.len()];
    let first = *levels.start();
    for level in levels {
        let mesh = domain.build(level)?;
        let mut values = Vec::new();
        let mut diagnostics = Vec::new();
        for (j, col) in columns.iter().enumerate() {
            let mut guess = guesses[j];
            if guess.is_none() && level > 1 && level == first && needs_shift_guess(&mesh, col.kind, opts) {
                let c = compute_constant(domain, level - 1, col.kind, &Constraint::Labels(col.labels.clone()), opts)?;
                guess = Some(c.lambda.powi(2));
            }
            let rec = compute_on_mesh(
                &mesh,
                domain.name(),
                level,
                col.kind,
                &Constraint::Labels(col.labels.clone()),
                opts,
                guess,
            )?;
            guesses[j] = Some(rec.lambda.powi(2));
            values.push(rec.c);
            diagnostics.push(rec.diagnostics);
        }
        rows.push(TableRow {
            level,
            values,
            diagnostics,
        });
    }
    let limits = match domain {
        Domain::Square | Domain::Cube => Some(
            columns
                .iter()
                .map(|c| c.exact_limit(dim).map(|e| e.constant()))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    Ok(ConvergenceTable {
        domain: domain.name().to_string(),
        scenario,
        columns,
        rows,
        limits,
    })
}

/// Constants for one prefix of the boundary sweep, in the order
/// `c0 tau, c0 nu, c1 tau, c1 nu, c2 tau, c2 nu`; `None` marks a failed solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStep {
    pub neumann_facets: usize,
    pub values: [Option<f64>; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub domain: String,
    pub level: u32,
    pub order: Vec<usize>,
    pub steps: Vec<SweepStep>,
}

pub const SWEEP_HEADERS: [&str; 6] = ["c0_tau", "c0_nu", "c1_tau", "c1_nu", "c2_tau", "c2_nu"];

/// Grows `gamma_nu` facet by facet along the breadth-first boundary order
/// starting at `seed` (default: the first boundary facet) and evaluates all
/// six constants for every prefix, from `gamma_nu` empty to the whole boundary.
pub fn monotonicity_sweep(domain: Domain, level: u32, seed: Option<usize>, opts: &SolveOptions) -> Result<SweepResult> {
    let mesh = domain.build(level)?;
    sweep_on_mesh(&mesh, domain.name(), level, seed, opts)
}

pub fn sweep_on_mesh(
    mesh: &Mesh,
    domain_name: &str,
    level: u32,
    seed: Option<usize>,
    opts: &SolveOptions,
) -> Result<SweepResult> {
    let seed = seed.unwrap_or(mesh.boundary_facets()[0]);
    let order = bfs_boundary_order(mesh, seed)?;
    let steps = (0..=order.len())
        .into_par_iter()
        .map(|p| -> Result<SweepStep> {
            let nu = BoundarySelection::from_facets(mesh, &order[..p])?;
            let tau = nu.complement(mesh)?;
            let mut values = [None; 6];
            for (i, kind) in [ConstantKind::C0, ConstantKind::C1, ConstantKind::C2].into_iter().enumerate() {
                for (s, sel) in [&tau, &nu].into_iter().enumerate() {
                    values[2 * i + s] = solve_on_mesh(mesh, kind, sel, opts, None).ok().map(|r| 1.0 / r.lambda);
                }
            }
            Ok(SweepStep {
                neumann_facets: p,
                values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        domain: domain_name.to_string(),
        level,
        order,
        steps,
    })
}

/// A failed inequality at one sweep step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub delta: f64,
    pub checked_steps: usize,
    pub skipped_steps: Vec<usize>,
    /// Smallest relative margin `(rhs (1 + delta) - lhs) / rhs` per checked step.
    pub margins: Vec<(usize, f64)>,
    pub violations: Vec<Violation>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, for every sweep step,
/// `c0(Gamma) <= min(c0 tau, c0 nu) <= c1 tau, c1 nu <= max(c0 tau, c0 nu)`,
/// each relation relaxed by the relative slack `delta`.
pub fn check_extended_inequalities(sweep: &SweepResult, delta: f64) -> InequalityReport {
    let c0_full = sweep.steps.first().and_then(|s| s.values[0]);
    let mut report = InequalityReport {
        delta,
        checked_steps: 0,
        skipped_steps: Vec::new(),
        margins: Vec::new(),
        violations: Vec::new(),
    };
    for step in &sweep.steps {
        let v = step.values;
        let (Some(c0t), Some(c0n), Some(c1t), Some(c1n), Some(c0g)) = (v[0], v[1], v[2], v[3], c0_full) else {
            report.skipped_steps.push(step.neumann_facets);
            continue;
        };
        let lo = c0t.min(c0n);
        let hi = c0t.max(c0n);
        let relations = [
            ("c0(Gamma) <= min c0", c0g, lo),
            ("min c0 <= c1_tau", lo, c1t),
            ("min c0 <= c1_nu", lo, c1n),
            ("c1_tau <= max c0", c1t, hi),
            ("c1_nu <= max c0", c1n, hi),
        ];
        let mut margin = f64::INFINITY;
        for (name, lhs, rhs) in relations {
            let m = (rhs * (1.0 + delta) - lhs) / rhs;
            margin = margin.min(m);
            if m < 0.0 {
                report.violations.push(Violation {
                    step: step.neumann_facets,
                    relation: name.to_string(),
                    lhs,
                    rhs,
                });
            }
        }
        report.checked_steps += 1;
        report.margins.push((step.neumann_facets, margin));
    }
    report
}

/// Whether the `c0 tau` column is nondecreasing up to `tol` as `gamma_nu`
/// grows. The final step (`gamma_tau` empty, mean-free constant) is excluded.
pub fn c0_tau_monotone(sweep: &SweepResult, tol: f64) -> std::result::Result<(), (usize, f64, f64)> {
    let vals: Vec<(usize, f64)> = sweep
        .steps
        .iter()
        .filter(|s| s.neumann_facets < sweep.order.len())
        .filter_map(|s| s.values[0].map(|c| (s.neumann_facets, c)))
        .collect();
    for w in vals.windows(2) {
        if w[1].1 < w[0].1 - tol * w[0].1.abs() {
            return Err((w[1].0, w[0].1, w[1].1));
        }
    }
    Ok(())
}
