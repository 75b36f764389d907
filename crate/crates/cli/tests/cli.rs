use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;

fn doc(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/documents").join(name)
}

fn run(cmd: &str, document: &str, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uhf"))
        .args([cmd, doc(document).to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn certify_regular_z2_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("certify", "z2_regular.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/z2_regular_certify.csv")).unwrap();
    assert_eq!(read(dir.path(), "certify.csv"), golden);
    let plan: serde_json::Value = serde_json::from_str(&read(dir.path(), "plan.json")).unwrap();
    assert_eq!(plan["command"], "certify");
    assert!(plan["document"].as_str().unwrap().contains("kind = \"regular\""));
}

/// `τ([u, v])` for the cyclic shift `u` and `v = diag(e^{2πiθ l r})`, summed entry by entry.
fn shift_commutator_trace(n: usize, theta: f64, r: f64) -> Complex64 {
    let v = |l: usize| Complex64::from_polar(1.0, std::f64::consts::TAU * theta * l as f64 * r);
    let sum: Complex64 = (0..n).map(|j| v((j + n - 1) % n) * v(j).conj()).sum();
    sum / n as f64
}

#[test]
fn flow_witness_matches_entrywise_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("witness", "flow_cycle.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "witness.csv");
    assert!(csv.starts_with("n,re_tau,im_tau,abs_one_minus_tau\n"));
    let rows = rows(&csv);
    assert_eq!(rows.len(), 64);
    for row in &rows {
        let n: usize = row[0].parse().unwrap();
        let got = Complex64::new(row[1].parse().unwrap(), row[2].parse().unwrap());
        let theta = if n % 2 == 1 { 1.0 } else { 2f64.sqrt() };
        let want = shift_commutator_trace(n, theta, 0.5);
        assert!((got - want).norm() < 1e-12, "n = {n}: {got} vs {want}");
        let gap: f64 = row[3].parse().unwrap();
        assert!((gap - (Complex64::new(1.0, 0.0) - got).norm()).abs() < 1e-12);
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("WITNESS"));
}

#[test]
fn flow_witness_against_displayed_closed_form() {
    // The displayed closed form agrees with the matrices exactly when
    // e^{2πi(θ_n+1)nr} = 1: for r = 1/2 that is every odd n, and no even n.
    let dir = tempfile::tempdir().unwrap();
    run("witness", "flow_cycle.toml", dir.path());
    for row in rows(&read(dir.path(), "witness.csv")) {
        let n: usize = row[0].parse().unwrap();
        let got = Complex64::new(row[1].parse().unwrap(), row[2].parse().unwrap());
        let c = uhf_core::witness::closed_form_flow_trace(n, 2f64.sqrt(), 0.5);
        if n % 2 == 1 {
            assert!((got - c).norm() < 1e-12, "n = {n}");
        } else {
            assert!((got - c).norm() > 1e-3, "n = {n}");
        }
    }
}

#[test]
fn malformed_table_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("info", "malformed_table.toml", dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1, column 1"), "{err}");
    assert!(err.contains("inverse"), "{err}");
}

#[test]
fn syntax_error_reports_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "[group]\ncyclic = 2\n\n[action]\nkind = \n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_uhf")).args(["info", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_element_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("certify", "unknown_element.toml", dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 8"));
}

#[test]
fn failed_certificate_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("certify", "trivial_element.toml", dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path(), "certify.csv");
    assert!(csv.lines().nth(1).unwrap().ends_with("false"));
}

#[test]
fn missing_task_table_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("witness", "z2_regular.toml", dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn artifacts_are_deterministic() {
    for (cmd, document, file) in [
        ("certify", "z2_regular.toml", "certify.csv"),
        ("crossed", "z2_regular.toml", "crossed.csv"),
        ("construct", "z2_onto_three.toml", "construct_1_witness.csv"),
        ("simplex", "sign_three.toml", "simplex.csv"),
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(cmd, document, a.path());
        run(cmd, document, b.path());
        assert_eq!(read(a.path(), file), read(b.path(), file), "{cmd}");
        assert_eq!(read(a.path(), "plan.json"), read(b.path(), "plan.json"), "{cmd}");
    }
}

#[test]
fn crossed_stages_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("crossed", "z2_regular.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let rows = rows(&read(dir.path(), "crossed.csv"));
    assert_eq!(rows.len(), 4);
    for (m, r) in rows.iter().enumerate() {
        assert_eq!(r[1], (1usize << m).to_string());
        assert_eq!(r[5], "true");
    }
}

#[test]
fn sign_action_simplex_and_cut_down() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("simplex", "sign_three.toml", dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = read(dir.path(), "simplex.csv");
    let diam: Vec<f64> = rows(&csv).iter().map(|r| r[4].parse().unwrap()).collect();
    for (l, d) in diam.iter().enumerate() {
        assert!((d - 2.0 * 3f64.powi(-(l as i32))).abs() < 1e-12, "depth {l}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("COLLAPSE (evidence)"));

    let dir = tempfile::tempdir().unwrap();
    let o = run("cut-down", "sign_three.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for r in rows(&read(dir.path(), "cut-down.csv")) {
        assert_eq!(r[1], "2");
        assert_eq!(&r[3..6], ["0.0000000000000000e0"; 3]);
    }
}

#[test]
fn bump_up_plan_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("bump-up", "sign_three.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let plan = read(dir.path(), "bump-up_plan.csv");
    assert!(plan.starts_with("level,source_start,source_end,source_size,target_start,target_end,target_size,quotient,remainder"));
    for r in rows(&plan) {
        let v: Vec<usize> = r.iter().map(|x| x.parse().unwrap()).collect();
        let (level, s, n, q, rem) = (v[0], v[3], v[6], v[7], v[8]);
        assert_eq!(n, q * s + rem);
        assert!((s as f64) / (n as f64) < 2f64.powi(-(level as i32)));
    }
    let json: serde_json::Value = serde_json::from_str(&read(dir.path(), "plan.json")).unwrap();
    assert_eq!(json["details"]["bump_up"]["plan"]["levels"].as_array().unwrap().len(), 4);
}

#[test]
fn induce_extend_and_universal_on_s3() {
    for (cmd, file) in [("induce", "induce.csv"), ("extend", "extend.csv"), ("construct", "construct_reports.csv")] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(cmd, "s3_over_a3.toml", dir.path());
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(read(dir.path(), file).lines().count() > 1);
    }
}

#[test]
fn strongly_outer_construction() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("construct", "z2_onto_three.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("same type as target: true"));
    assert!(stdout.contains("construction: PASS"));
}

#[test]
fn explicit_matrices_evaluate_and_tower() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("evaluate", "explicit_matrix.toml", dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // swap ⊗ swap on C^2 ⊗ C^2 sends e_j to e_{3-j}
    let entries: Vec<(usize, usize)> =
        rows(&read(dir.path(), "evaluate.csv")).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(entries, vec![(0, 3), (1, 2), (2, 1), (3, 0)]);
    let o = run("tower", "explicit_matrix.toml", dir.path());
    assert_eq!(o.status.code(), Some(0));
    let r = &rows(&read(dir.path(), "tower.csv"))[0];
    assert_eq!((r[1].as_str(), r[2].as_str()), ("8", "2"));
}

#[test]
fn info_describes_the_action() {
    let o = Command::new(env!("CARGO_BIN_EXE_uhf")).args(["info", doc("s3_over_a3.toml").to_str().unwrap()]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("order 6"));
    assert!(s.contains("type: 2^inf * 3^inf"), "{s}");
}
