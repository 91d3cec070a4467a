use std::process::{Command, Output};

fn pf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pf")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn oracle_prints_symbolic_and_decimal() {
    let o = pf(&["oracle", "--dim", "3", "--which", "lambda0", "--gamma-tau", "b,t,l,r,k"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("3π/2"), "{s}");
    assert!(s.contains("2/(3π) = 0.21220659"), "{s}");
    let o = pf(&["oracle", "--dim", "3", "--which", "lambda1", "--gamma-tau", "l,r"]);
    assert!(stdout(&o).contains("1/π = 0.31830989"));
    let o = pf(&["oracle", "--dim", "1", "--gamma-tau", "0"]);
    assert!(stdout(&o).contains("π/2"));
}

#[test]
fn mesh_reports_counts() {
    let o = pf(&["mesh", "--domain", "cube", "--level", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["cells"], 384);
    assert_eq!(v["edges"], 604);
    assert_eq!(v["boundary_facets"], 192);
}

#[test]
fn constant_matches_reference_level_one() {
    let o = pf(&["constant", "--domain", "square", "--level", "1", "--kind", "c0", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("1,0.31072999"));
    let o = pf(&["constant", "--domain", "cube", "--level", "1", "--kind", "c1", "--gamma-tau", "all"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["c"].as_f64().unwrap() - 0.22964649).abs() < 5e-9);
    assert_eq!(v["diagnostics"]["method"], "projected");
}

#[test]
fn facet_constraints_from_file() {
    let dir = std::env::temp_dir().join(format!("pf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let o = pf(&["mesh", "--domain", "square", "--level", "1", "--facets"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let all: Vec<String> = v["facet_list"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["facet"].to_string())
        .collect();
    let path = dir.join("facets.txt");
    std::fs::write(&path, all.join("\n")).unwrap();
    let o = pf(&[
        "constant",
        "--domain",
        "square",
        "--level",
        "1",
        "--kind",
        "c0",
        "--gamma-tau-facets",
        path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("0.20912552"));
}

#[test]
fn outputs_files() {
    let dir = std::env::temp_dir().join(format!("pf-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let vtk = dir.join("u.vtk");
    let o = pf(&[
        "constant", "--domain", "square", "--level", "2", "--kind", "c2", "--gamma-tau", "all", "--format", "vtk",
        "--out", vtk.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&vtk).unwrap();
    assert!(text.contains("CELL_DATA 128"));
    let mtx = dir.join("k.mtx");
    let o = pf(&[
        "assemble", "--domain", "square", "--level", "1", "--space", "n", "--op", "stiffness", "--gamma-tau", "all",
        "--out", mtx.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&mtx).unwrap();
    // 56 edges, 16 of them on the boundary
    assert!(text.lines().nth(1).unwrap().starts_with("40 40 "));
}

#[test]
fn table_csv_has_limit_and_orders() {
    let o = pf(&["table", "--domain", "square", "--level", "2", "--scenario", "mixed"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("level,c0_b_P1,"));
    assert!(s.contains("\ninf,0.63661977,"));
    assert!(s.contains("\norder_1_2,"));
}

#[test]
fn exit_codes() {
    // a negative slack turns every relation into a violation
    let o = pf(&["check", "--domain", "square", "--level", "1", "--delta=-0.5"]);
    assert_eq!(o.status.code(), Some(3));
    let o = pf(&["check", "--domain", "square", "--level", "1", "--delta", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = pf(&["constant", "--domain", "square", "--level", "1", "--kind", "c1", "--solver", "shift", "--tol", "1e-40"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let o = pf(&["constant", "--domain", "nowhere", "--kind", "c0"]);
    assert_eq!(o.status.code(), Some(1));
}
