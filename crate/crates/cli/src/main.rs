use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pfconst_core::eigen::SolverChoice;
use pfconst_core::fem::{assemble, restrict};
use pfconst_core::harness::{
    c0_tau_monotone, check_extended_inequalities, compute_constant, convergence_table, monotonicity_sweep,
    ConstantKind, Constraint, Scenario, SolveOptions,
};
use pfconst_core::io::{write_matrix_market, write_vtk, CsvTable};
use pfconst_core::oracle::{exact_lambda0, exact_lambda1_3d, BoxBc};
use pfconst_core::{BoundaryLabel, Domain, Error, FeSpace, Operator, SpaceKind};

#[derive(Parser)]
#[command(name = "pf", version, about = "Poincaré–Friedrichs, divergence and Maxwell constants by finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one constant on one mesh.
    Constant(ConstantArgs),
    /// Six-column convergence table over a range of levels.
    Table(TableArgs),
    /// Grow the Neumann part facet by facet and compute all constants.
    Sweep(SweepArgs),
    /// Sweep and verify the extended inequalities and monotonicity.
    Check(CheckArgs),
    /// Exact eigenvalues on the unit interval, square or cube.
    Oracle(OracleArgs),
    /// Mesh statistics or VTK output.
    Mesh(MeshArgs),
    /// Write an assembled matrix in MatrixMarket format.
    Assemble(AssembleArgs),
}

#[derive(Args)]
struct MeshSel {
    #[arg(long, value_parser = parse_domain)]
    domain: Domain,
    #[arg(long, default_value_t = 1)]
    level: u32,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "auto", value_parser = parse_solver)]
    solver: SolverChoice,
    /// Relative residual tolerance of the iterative solvers.
    #[arg(long)]
    tol: Option<f64>,
    /// Free DOF count up to which the automatic policy uses the projected method.
    #[arg(long)]
    projected_max_dofs: Option<usize>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        let mut o = SolveOptions::with_solver(self.solver);
        if let Some(t) = self.tol {
            o.eigen.tol = t;
        }
        if let Some(n) = self.projected_max_dofs {
            o.projected_max_dofs = n;
        }
        o
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Vtk,
}

#[derive(Args)]
struct ConstantArgs {
    #[command(flatten)]
    mesh: MeshSel,
    #[arg(long, value_parser = parse_kind)]
    kind: ConstantKind,
    /// Constrained sides, e.g. `b,l,k`; `none` or `all` are accepted.
    #[arg(long, default_value = "none", conflicts_with = "gamma_tau_facets")]
    gamma_tau: String,
    /// File with constrained boundary facet indices (whitespace or comma separated).
    #[arg(long)]
    gamma_tau_facets: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_parser = parse_domain)]
    domain: Domain,
    /// Finest level.
    #[arg(long, default_value_t = 3)]
    level: u32,
    #[arg(long, default_value_t = 1)]
    min_level: u32,
    #[arg(long, default_value = "full", value_parser = parse_scenario)]
    scenario: Scenario,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    mesh: MeshSel,
    /// First boundary facet of the breadth-first order.
    #[arg(long)]
    seed: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Relative slack of the inequalities.
    #[arg(long, default_value_t = 0.02)]
    delta: f64,
    /// Relative tolerance of the monotonicity check.
    #[arg(long, default_value_t = 1e-8)]
    mono_tol: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    #[arg(long, default_value = "lambda0")]
    which: String,
    /// Dirichlet (tangential) faces: labels in 2D/3D, `0,1` in 1D.
    #[arg(long, default_value = "none")]
    gamma_tau: String,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    mesh: MeshSel,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// List every boundary facet with its label and nodes.
    #[arg(long)]
    facets: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AssembleArgs {
    #[command(flatten)]
    mesh: MeshSel,
    #[arg(long, value_parser = parse_space)]
    space: SpaceKind,
    #[arg(long, value_parser = parse_op)]
    op: Operator,
    /// Restrict to the DOFs free of the given sides.
    #[arg(long)]
    gamma_tau: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_domain(s: &str) -> Result<Domain, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<ConstantKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_space(s: &str) -> Result<SpaceKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_op(s: &str) -> Result<Operator, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "mass" | "m" => Ok(Operator::Mass),
        "stiffness" | "k" => Ok(Operator::Stiffness),
        other => Err(format!("unknown operator `{other}`")),
    }
}

enum Failure {
    Core(Error),
    Invariant(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type CliResult = Result<(), Failure>;

fn output(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn json_to(out: &Option<PathBuf>, value: &serde_json::Value) -> CliResult {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Core(Error::Parse(e.to_string())))?;
    writeln!(w)?;
    Ok(())
}

fn read_facets(path: &PathBuf) -> Result<Vec<usize>, Failure> {
    let text = std::fs::read_to_string(path)?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|e| Failure::Usage(format!("bad facet index `{t}`: {e}")))
        })
        .collect()
}

fn run_constant(a: ConstantArgs) -> CliResult {
    let dim = a.mesh.domain.dim();
    let constraint = match &a.gamma_tau_facets {
        Some(p) => Constraint::Facets(read_facets(p)?),
        None => Constraint::Labels(BoundaryLabel::parse_list(&a.gamma_tau, dim)?),
    };
    let opts = a.solver.options();
    let rec = compute_constant(a.mesh.domain, a.mesh.level, a.kind, &constraint, &opts)?;
    match a.format {
        Format::Json => json_to(&a.out, &serde_json::to_value(&rec).expect("record serializes")),
        Format::Csv => {
            let t = CsvTable {
                label: "level".into(),
                headers: vec![format!("{}_{}_{}", rec.kind, rec.gamma, rec.space)],
                rows: vec![(rec.level.to_string(), vec![Some(rec.c)])],
            };
            let mut w = output(&a.out)?;
            w.write_all(t.to_csv()?.as_bytes())?;
            Ok(())
        }
        Format::Vtk => {
            let mesh = a.mesh.domain.build(a.mesh.level)?;
            let mut w = output(&a.out)?;
            let name = format!("{}_{}", rec.kind, rec.gamma.replace(',', ""));
            write_vtk(&mut w, &mesh, Some((&name, a.kind.space(), &rec.eigenvector)))?;
            Ok(())
        }
    }
}

fn run_table(a: TableArgs) -> CliResult {
    if a.min_level > a.level {
        return Err(Failure::Usage(format!("--min-level {} exceeds --level {}", a.min_level, a.level)));
    }
    let opts = a.solver.options();
    let table = convergence_table(a.domain, a.min_level..=a.level, a.scenario, &opts)?;
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&table).expect("table serializes");
            v["orders"] = serde_json::to_value(table.orders()).expect("orders serialize");
            json_to(&a.out, &v)
        }
        Format::Csv => {
            let mut csv = CsvTable::from_convergence(&table);
            let first = table.rows.first().map(|r| r.level).unwrap_or(0);
            let offset = if table.limits.is_some() { 1 } else { 2 };
            for (i, o) in table.orders().into_iter().enumerate() {
                let l = first + i as u32;
                csv.rows.push((format!("order_{}_{}", l, l + offset), o));
            }
            let mut w = output(&a.out)?;
            w.write_all(csv.to_csv()?.as_bytes())?;
            Ok(())
        }
        Format::Vtk => Err(Failure::Usage("tables are written as csv or json".into())),
    }
}

fn sweep(a: &SweepArgs) -> Result<pfconst_core::harness::SweepResult, Failure> {
    Ok(monotonicity_sweep(a.mesh.domain, a.mesh.level, a.seed, &a.solver.options())?)
}

fn run_sweep(a: SweepArgs) -> CliResult {
    let s = sweep(&a)?;
    match a.format {
        Format::Json => json_to(&a.out, &serde_json::to_value(&s).expect("sweep serializes")),
        Format::Csv => {
            let mut w = output(&a.out)?;
            w.write_all(CsvTable::from_sweep(&s).to_csv()?.as_bytes())?;
            Ok(())
        }
        Format::Vtk => Err(Failure::Usage("sweeps are written as csv or json".into())),
    }
}

fn run_check(a: CheckArgs) -> CliResult {
    let s = sweep(&a.sweep)?;
    let report = check_extended_inequalities(&s, a.delta);
    let mono = c0_tau_monotone(&s, a.mono_tol);
    let min_margin = report.margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let v = serde_json::json!({
        "domain": s.domain,
        "level": s.level,
        "steps": s.steps.len(),
        "report": report,
        "min_margin": min_margin,
        "c0_tau_monotone": mono.is_ok(),
    });
    match a.sweep.format {
        Format::Json => json_to(&a.sweep.out, &v)?,
        _ => {
            let mut w = output(&a.sweep.out)?;
            writeln!(
                w,
                "{} level {}: {} steps, {} checked, {} skipped, {} violations (delta {}), min margin {:.3e}",
                s.domain,
                s.level,
                s.steps.len(),
                report.checked_steps,
                report.skipped_steps.len(),
                report.violations.len(),
                a.delta,
                min_margin
            )?;
            for viol in &report.violations {
                writeln!(w, "  step {}: {}: {:.8} vs {:.8}", viol.step, viol.relation, viol.lhs, viol.rhs)?;
            }
            match mono {
                Ok(()) => writeln!(w, "c0_tau monotone: yes")?,
                Err((step, before, after)) => {
                    writeln!(w, "c0_tau monotone: no (step {step}: {before:.10} -> {after:.10})")?
                }
            }
        }
    }
    if !report.passed() {
        return Err(Failure::Invariant(format!("{} inequality violations", report.violations.len())));
    }
    if let Err((step, _, _)) = mono {
        return Err(Failure::Invariant(format!("c0_tau decreases at step {step}")));
    }
    Ok(())
}

fn run_oracle(a: OracleArgs) -> CliResult {
    let dim = a.dim as usize;
    let bc = BoxBc::parse(dim, &a.gamma_tau)?;
    let exact = match (a.which.as_str(), dim) {
        ("lambda0", _) => exact_lambda0(bc),
        ("lambda1", 2) => exact_lambda0(bc.complement()),
        ("lambda1", 3) => exact_lambda1_3d(bc)?,
        ("lambda2", _) => exact_lambda0(bc.complement()),
        (w, d) => return Err(Failure::Usage(format!("no exact value for `{w}` in dimension {d}"))),
    };
    println!("gamma_tau: {bc}");
    println!("lambda   = {} = {:.8}", exact.lambda_symbolic(), exact.lambda());
    println!("lambda^2 = {:.8}", exact.lambda_sq());
    println!("c        = {} = {:.8}", exact.constant_symbolic(), exact.constant());
    Ok(())
}

fn run_mesh(a: MeshArgs) -> CliResult {
    let mesh = a.mesh.domain.build(a.mesh.level)?;
    match a.format {
        Format::Vtk => {
            let mut w = output(&a.out)?;
            write_vtk(&mut w, &mesh, None)?;
            Ok(())
        }
        Format::Json | Format::Csv => {
            let mut v = serde_json::json!({
                "domain": a.mesh.domain.name(),
                "level": a.mesh.level,
                "dim": mesh.dim(),
                "nodes": mesh.num_nodes(),
                "edges": mesh.num_edges(),
                "faces": mesh.num_faces(),
                "cells": mesh.num_cells(),
                "boundary_facets": mesh.boundary_facets().len(),
                "volume": mesh.total_volume(),
            });
            if a.facets {
                let list: Vec<_> = mesh
                    .boundary_facets()
                    .iter()
                    .map(|&f| {
                        serde_json::json!({
                            "facet": f,
                            "label": mesh.facet_label(f),
                            "nodes": mesh.facet_nodes(f),
                        })
                    })
                    .collect();
                v["facet_list"] = serde_json::Value::Array(list);
            }
            json_to(&a.out, &v)
        }
    }
}

fn run_assemble(a: AssembleArgs) -> CliResult {
    let mesh = a.mesh.domain.build(a.mesh.level)?;
    let space = FeSpace::new(a.space, &mesh);
    let mut matrix = assemble(space, a.op)?;
    if let Some(g) = &a.gamma_tau {
        let sel = Constraint::Labels(BoundaryLabel::parse_list(g, mesh.dim())?).select(&mesh)?;
        matrix = restrict(&matrix, space, &sel)?.0;
    }
    let mut w = output(&a.out)?;
    write_matrix_market(&mut w, &matrix)?;
    Ok(())
}

fn main() -> ExitCode {
    // clap reports usage errors with status 2, which is reserved for solver failures
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Constant(a) => run_constant(a),
        Command::Table(a) => run_table(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Check(a) => run_check(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Mesh(a) => run_mesh(a),
        Command::Assemble(a) => run_assemble(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant violated: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
