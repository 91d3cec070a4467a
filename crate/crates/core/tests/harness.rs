use pfconst_core::harness::{
    c0_tau_monotone, check_extended_inequalities, compute_constant, convergence_table, monotonicity_sweep,
    ConstantKind, Constraint, ConvergenceTable, Scenario, SolveOptions, SweepResult, SweepStep,
};
use pfconst_core::io::CsvTable;
use pfconst_core::{BoundaryLabel, Domain};

// Reference level-1 rows, in table column order.
const LEVEL_ONE: [(Domain, Scenario, [f64; 6]); 8] = [
    (Domain::Square, Scenario::Full, [0.31072999, 0.32316745, 0.32316745, 0.22328039, 0.22328039, 0.20912552]),
    (Domain::Square, Scenario::Mixed, [0.63267458, 0.63798842, 0.63798842, 0.28486798, 0.28486798, 0.27318834]),
    (Domain::LShape, Scenario::Full, [0.39156654, 0.43611331, 0.43611331, 0.16795692, 0.16795692, 0.13325394]),
    (Domain::LShape, Scenario::Mixed, [0.55287499, 0.58356116, 0.58356116, 0.24038804, 0.24038804, 0.21444362]),
    (Domain::Cube, Scenario::Full, [0.31114284, 0.32265677, 0.22964649, 0.22346361, 0.18305860, 0.16330104]),
    (Domain::Cube, Scenario::Mixed, [0.63279353, 0.63799454, 0.28810408, 0.28568645, 0.21207495, 0.19466267]),
    (Domain::Fichera, Scenario::Full, [0.34328060, 0.37118723, 0.30375245, 0.26905796, 0.15938388, 0.12490491]),
    (Domain::Fichera, Scenario::Mixed, [0.59192242, 0.60790729, 0.32388929, 0.30017867, 0.19741476, 0.17047720]),
];

#[test]
fn level_one_rows_match_reference_digits() {
    for (domain, scenario, printed) in LEVEL_ONE {
        let t = convergence_table(domain, 1..=1, scenario, &SolveOptions::default()).unwrap();
        for (j, (a, b)) in t.rows[0].values.iter().zip(printed).enumerate() {
            assert!((a - b).abs() <= 5e-9, "{domain} {scenario:?} column {}: {a:.8} vs {b:.8}", j + 1);
        }
    }
}

#[test]
fn single_constants() {
    let opts = SolveOptions::default();
    let r = compute_constant(Domain::Square, 1, ConstantKind::C0, &Constraint::Labels(vec![]), &opts).unwrap();
    assert!((r.c - 0.31072999).abs() < 5e-9);
    assert!((r.c * r.lambda - 1.0).abs() < 1e-15);
    assert_eq!(r.diagnostics.kernel_dim, 1);
    let all = BoundaryLabel::all(3).to_vec();
    let r = compute_constant(Domain::Cube, 1, ConstantKind::C1, &Constraint::Labels(all), &opts).unwrap();
    assert!((r.c - 0.22964649).abs() < 5e-9);
    let r = compute_constant(
        Domain::LShape,
        1,
        ConstantKind::C0,
        &Constraint::Labels(BoundaryLabel::all(2).to_vec()),
        &opts,
    )
    .unwrap();
    assert!((r.c - 0.13325394).abs() < 5e-9);
    // 5x5 grid without the four nodes strictly inside the removed quadrant
    assert_eq!(r.eigenvector.len(), 21);
}

#[test]
fn facet_constraint_equals_label_constraint() {
    let mesh = Domain::Cube.build(1).unwrap();
    let bottom: Vec<usize> = mesh
        .boundary_facets()
        .iter()
        .copied()
        .filter(|&f| mesh.facet_label(f) == Some(BoundaryLabel::B))
        .collect();
    let opts = SolveOptions::default();
    for kind in [ConstantKind::C0, ConstantKind::C1, ConstantKind::C2] {
        let a = compute_constant(Domain::Cube, 1, kind, &Constraint::Labels(vec![BoundaryLabel::B]), &opts).unwrap();
        let b = compute_constant(Domain::Cube, 1, kind, &Constraint::Facets(bottom.clone()), &opts).unwrap();
        assert!((a.c - b.c).abs() < 1e-12 * a.c);
    }
}

#[test]
fn sweep_shape_and_endpoints() {
    let s = monotonicity_sweep(Domain::Square, 1, None, &SolveOptions::default()).unwrap();
    let mesh = Domain::Square.build(1).unwrap();
    assert_eq!(s.steps.len(), mesh.boundary_facets().len() + 1);
    let first = s.steps[0].values.map(|v| v.unwrap());
    // gamma_nu empty: tau is the whole boundary
    let full = [0.20912552, 0.31072999, 0.32316745, 0.22328039, 0.32316745, 0.22328039];
    for (a, b) in first.iter().zip(full) {
        assert!((a - b).abs() < 5e-9, "{a} vs {b}");
    }
    let last = s.steps.last().unwrap().values.map(|v| v.unwrap());
    assert!((last[0] - full[1]).abs() < 5e-9 && (last[1] - full[0]).abs() < 5e-9);
    assert!(c0_tau_monotone(&s, 1e-8).is_ok());
    let csv = CsvTable::from_sweep(&s).to_csv().unwrap();
    assert_eq!(CsvTable::parse(&csv).unwrap().rows.len(), s.steps.len());
}

fn synthetic(values: &[[f64; 6]]) -> SweepResult {
    SweepResult {
        domain: "synthetic".into(),
        level: 0,
        order: (0..values.len() - 1).collect(),
        steps: values
            .iter()
            .enumerate()
            .map(|(i, v)| SweepStep {
                neumann_facets: i,
                values: v.map(Some),
            })
            .collect(),
    }
}

#[test]
fn inequality_report_flags_and_tolerates() {
    // c0 tau, c0 nu, c1 tau, c1 nu, c2 tau, c2 nu
    let s = synthetic(&[[0.2, 0.3, 0.25, 0.25, 0.0, 0.0], [0.21, 0.3, 0.31, 0.2, 0.0, 0.0]]);
    let r = check_extended_inequalities(&s, 0.0);
    assert_eq!(r.checked_steps, 2);
    let steps: Vec<usize> = r.violations.iter().map(|v| v.step).collect();
    assert_eq!(steps, vec![1, 1]);
    assert!(check_extended_inequalities(&s, 0.06).passed());
    let mut gap = s.clone();
    gap.steps[1].values[2] = None;
    let r = check_extended_inequalities(&gap, 0.0);
    assert_eq!(r.skipped_steps, vec![1]);
}

#[test]
fn monotonicity_ignores_the_mean_free_endpoint() {
    let s = synthetic(&[[0.2; 6], [0.3; 6], [0.25; 6]]);
    assert!(c0_tau_monotone(&s, 1e-8).is_ok());
    let s = synthetic(&[[0.2; 6], [0.3; 6], [0.25; 6], [0.4; 6]]);
    assert_eq!(c0_tau_monotone(&s, 1e-8), Err((2, 0.3, 0.25)));
}

#[test]
fn orders_from_limits_and_richardson() {
    let h2 = |l: u32| 0.5 + 4f64.powi(-(l as i32));
    let t = convergence_table(Domain::Square, 1..=1, Scenario::Full, &SolveOptions::default()).unwrap();
    let mut synth: ConvergenceTable = t.clone();
    synth.rows = (1..=4)
        .map(|l| {
            let mut r = t.rows[0].clone();
            r.level = l;
            r.values = vec![h2(l); 6];
            r
        })
        .collect();
    synth.limits = Some(vec![0.5; 6]);
    for o in synth.orders() {
        assert!(o.iter().all(|x| (x.unwrap() - 2.0).abs() < 1e-9));
    }
    synth.limits = None;
    let o = synth.orders();
    assert_eq!(o.len(), 2);
    assert!(o.iter().flatten().all(|x| (x.unwrap() - 2.0).abs() < 1e-9));
}
