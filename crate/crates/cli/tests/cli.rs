use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn geoent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoent")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(&format!("{key} = "))).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split(" = ").nth(1).unwrap().parse().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(geoent(&["--help"]).status.code(), Some(0));
    assert_eq!(geoent(&[]).status.code(), Some(1));
    assert_eq!(geoent(&["sweep", "--chi", "nope"]).status.code(), Some(1));
    assert_eq!(geoent(&["gs", "--model", "potts", "--h", "1", "--out", "x.json"]).status.code(), Some(1));
}

#[test]
fn missing_state_file_is_usage_error() {
    let o = geoent(&["analyze", "--state", "/nonexistent/state.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_state_file_is_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{\"version\": 1}").unwrap();
    assert_eq!(geoent(&["analyze", "--state", p.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn gs_analyze_geoent_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("state.json");
    let ps = p.to_str().unwrap();
    let o = geoent(&["gs", "--model", "tfim", "--h", "3", "--chi", "8", "--seed", "1", "--out", ps]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let e0 = field(&stdout(&o), "energy_per_site");
    assert!((e0 + 3.0838).abs() < 1e-3, "{e0}");

    let a = stdout(&geoent(&["analyze", "--state", ps, "--L", "1,2"]));
    let e_asym = field(&a, "E_asym");
    assert!(field(&a, "E1(L=1)") > 0.0);

    let g = geoent(&["geoent", "--state", ps, "--L", "8", "--starts", "2"]);
    assert!(g.status.success());
    // far beyond the correlation length the finite value sits on the asymptote
    assert!((field(&stdout(&g), "E") - e_asym).abs() < 1e-6);
}

fn sweep_into(dir: &Path) -> Output {
    geoent(&[
        "sweep", "--h-min", "1.4", "--h-max", "2.0", "--points", "3", "--chi", "8", "--seed", "3", "--out-dir",
        dir.to_str().unwrap(),
    ])
}

#[test]
fn sweep_outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (oa, ob) = (sweep_into(a.path()), sweep_into(b.path()));
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    assert!(ob.status.success());
    for f in ["records.csv", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }
    let csv = fs::read_to_string(a.path().join("records.csv")).unwrap();
    assert!(csv.starts_with("h,chi,L,xi,lambda1,E_asym,E_finite,E1,nu2_abs\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(fs::read_to_string(a.path().join("plot.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn single_point_sweep_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = geoent(&["sweep", "--h-min", "2", "--h-max", "2", "--points", "1", "--chi", "4", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracle_check_runs() {
    let o = geoent(&["oracle-check", "--N", "8", "--L", "1", "--h", "3", "--chi", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(field(&stdout(&o), "rel_diff") < 0.1);
}

#[test]
fn verify_reports_every_check() {
    let o = geoent(&["verify", "--corpus-seed", "0"]);
    let text = stdout(&o);
    assert!(text.contains("canonical residuals") && text.contains("E <= E1"));
    // exit status follows the checks
    let failed = text.lines().any(|l| l.starts_with("FAIL"));
    assert_eq!(o.status.code(), Some(if failed { 3 } else { 0 }));
}
