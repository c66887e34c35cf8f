use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CIRCLE: &str = "\
[interface]
kind = circle
radius = 0.5

[discretization]
k = 2
h = 0.2
tau_rule = c_h2
tau_c = 1

[physics]
T = 0.04
nu_minus = 1
nu_plus = 10
";

fn twophase(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twophase")).args(args).current_dir(dir).output().unwrap()
}

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), config).unwrap();
    dir
}

#[test]
fn run_with_zero_final_time_writes_initial_state() {
    let dir = setup(CIRCLE);
    let out = twophase(&["run", "--quiet", "--config", "run.cfg", "--set", "physics.T=0", "--out", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,0.0,"));
    for file in ["bulk_000000.vtk", "interface_000000.vtk", "mesh.txt", "config.txt"] {
        assert!(dir.path().join("out").join(file).exists(), "{file} missing");
    }
    let vtk = fs::read_to_string(dir.path().join("out/bulk_000000.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version"));
}

#[test]
fn snapshots_follow_the_configured_interval() {
    let dir = setup(CIRCLE);
    let out = twophase(
        &["run", "--quiet", "--config", "run.cfg", "--set", "physics.T=0.2", "--set", "output.snapshot_every=2", "--out", "o"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("o/diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let mut snaps: Vec<String> = fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("bulk_"))
        .collect();
    snaps.sort();
    assert_eq!(snaps, ["bulk_000000.vtk", "bulk_000002.vtk", "bulk_000004.vtk", "bulk_000005.vtk"]);
}

#[test]
fn converge_on_the_circle_writes_an_eoc_table() {
    let dir = setup(CIRCLE);
    let out = twophase(&["converge", "--quiet", "--config", "run.cfg", "--levels", "3", "--out", "eoc"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("eoc/eoc.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains("rate_u_H1_err"));
    assert!(lines[1..].iter().all(|l| l.contains("exact_circle")));
    let text = fs::read_to_string(dir.path().join("eoc/eoc.txt")).unwrap();
    assert!(text.contains("exact_circle"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn converge_rejects_a_single_level() {
    let dir = setup(CIRCLE);
    let out = twophase(&["converge", "--quiet", "--config", "run.cfg", "--levels", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_mesh_reexports_identically() {
    let dir = setup(CIRCLE);
    let run = twophase(&["run", "--quiet", "--config", "run.cfg", "--set", "physics.T=0", "--out", "o"], dir.path());
    assert!(run.status.success());
    let out = twophase(&["check-mesh", "o/mesh.txt"], dir.path());
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("re-export            identical"), "{report}");
    assert!(report.contains("jacobians            positive"));
}

#[test]
fn check_mesh_rejects_a_corrupt_file() {
    let dir = setup(CIRCLE);
    fs::write(dir.path().join("bad.txt"), "MESH2D k=2\nNODES 1\n0.0 zero\n").unwrap();
    let out = twophase(&["check-mesh", "bad.txt"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn identities_pass_and_are_written() {
    let dir = setup(CIRCLE);
    let out = twophase(&["identities", "--config", "run.cfg", "--out", "id"], dir.path());
    assert!(out.status.success());
    let report = fs::read_to_string(dir.path().join("id/identities.txt")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = setup(CIRCLE);
    let bad_k = twophase(&["run", "--quiet", "--config", "run.cfg", "--set", "discretization.k=1"], dir.path());
    assert_eq!(bad_k.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_k.stderr).contains("k must be"));
    let missing = twophase(&["run", "--config", "missing.cfg"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    let bad_override = twophase(&["run", "--config", "run.cfg", "--set", "nonsense"], dir.path());
    assert_eq!(bad_override.status.code(), Some(2));
}
