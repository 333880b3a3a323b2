use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn relaybeam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaybeam"))
        .args(args)
        .env("RELAYBEAM_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: [&str; 4] = ["--trials", "3", "--snapshots", "10"];

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let mut args = vec!["run", "--seed", "42", "--out", path(out)];
        args.extend(SMALL);
        assert!(relaybeam(&args).status.success());
    }
    let csv = fs::read(a.join("results.csv")).unwrap();
    assert_eq!(csv, fs::read(b.join("results.csv")).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("algorithm,axis_name,axis_value,sinr_db,trials,snapshots,seed\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 5);
    assert!(!text.contains('\r'));
    assert!(a.join("results.dat").exists());
}

#[test]
fn manifest_replays_to_the_same_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let mut args = vec!["sweep", "--axis", "snr_db", "--grid", "0:10:5", "--out", path(&first)];
    args.extend(SMALL);
    assert!(relaybeam(&args).status.success());

    let replay = dir.path().join("replay");
    let manifest = first.join("manifest.txt");
    let out = relaybeam(&["run", "--config", path(&manifest), "--out", path(&replay)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(first.join("results.csv")).unwrap(),
        fs::read(replay.join("results.csv")).unwrap()
    );
}

#[test]
fn missing_required_key_exits_two_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "K = 3\nsnr_db = 10\n").unwrap();
    let out = relaybeam(&["run", "--config", path(&config), "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('M'));
}

#[test]
fn empty_grid_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = relaybeam(&["sweep", "--axis", "pt_dbw", "--grid", "", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep_grid"));
}

#[test]
fn unknown_override_exits_two() {
    let out = relaybeam(&["validate", "--no_such_key", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn validate_passes_and_injected_fault_is_named() {
    let out = relaybeam(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let out = relaybeam(&["validate", "--inject-fault", "projector"]);
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.lines().any(|l| l.starts_with("FAIL") && l.contains("projector idempotence")));
}

#[test]
fn literal_denominator_breaks_solver_consistency() {
    let out = relaybeam(&["validate", "--literal_denominator", "true"]);
    assert_eq!(out.status.code(), Some(1));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.lines().any(|l| l.starts_with("FAIL") && l.contains("solver consistency")));
}
