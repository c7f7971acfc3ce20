use std::fs;
use std::process::{Command, Output};

fn qsprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsprep")).args(args).output().expect("spawn qsprep")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn prepare_from_a_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    fs::write(&path, "2 8\n0.1\n0.9\n0.4\n0.6\n").unwrap();
    let o = qsprep(&["prepare", "--oracle", path.to_str().unwrap(), "--eps", "0.01", "--delta", "0.05", "--show-state"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("oracle calls"));
    assert_eq!(out.lines().filter(|l| l.trim_start().starts_with(char::is_numeric) && l.contains('i')).count(), 4);
}

#[test]
fn failing_bound_sets_exit_code_one() {
    // A constant table shifts every amplitude by the same amount, which the
    // sqrt(gamma) inequality does not survive.
    let o = qsprep(&["verify-bounds", "--dist", "uniform", "--n", "1", "--eps", "0.01", "--delta", "0.05"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL  |sqrt(gamma)"));
}

#[test]
fn verify_bounds_prints_every_check() {
    let o = qsprep(&["verify-bounds", "--dist", "random", "--n", "3", "--seed", "7", "--total-failure", "0.02"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 7);
}

#[test]
fn grover_reports_scaling_ratio() {
    let o = qsprep(&["grover", "--n", "3", "--x0", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("calls / sqrt(N)"));
    assert_eq!(qsprep(&["grover", "--n", "3", "--x0", "8"]).status.code(), Some(2));
}

#[test]
fn phases_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("p.txt");
    let out = dir.path().join("phi.txt");
    fs::write(&poly, "chebyshev odd 3\n0 0\n0 0\n0 0\n1 0\n").unwrap();
    let o = qsprep(&["phases", poly.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let phi = qsp_stateprep::phases::PhaseSequence::from_text(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(phi.len(), 3);
    assert!((qsp_stateprep::phases::reconstruct(&phi, 0.3).re - (4.0 * 0.027 - 0.9)).abs() < 1e-12);
}

#[test]
fn bad_inputs_exit_two() {
    assert_eq!(qsprep(&["prepare", "--eps", "0.1", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(qsprep(&["prepare", "--oracle", "/nonexistent", "--eps", "0.1", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(qsprep(&["prepare", "--dist", "uniform", "--n", "2", "--eps", "0.1"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    fs::write(&spec, "seed = 3\n[[grid]]\nn = [2]\ndist = [\"random\"]\nepsilon = [0.01, 0.001]\ndelta = [0.05]\n").unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = qsprep(&["sweep", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 3);
}
