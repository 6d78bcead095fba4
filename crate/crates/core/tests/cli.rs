use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn elastica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastica"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value printed after `key` on its own line.
fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|rest| rest.trim().parse().ok())
        .unwrap_or_else(|| panic!("no `{key}` in:\n{text}"))
}

const SMALL: &str = "\
name = smoke
grid.n = 48
grid.extent = 1.1
energy.epsilon = 0.05
energy.length = off
energy.winding = on
energy.mismatch = on
flow.relax_steps = 3
init.kind = curves
init.curves = circle 0 0 0.4 +
run.steps = 6
run.snapshot_every = 2
";

#[test]
fn run_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    std::fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("out");
    let o = elastica(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--progress", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    // header plus the initial record and six steps
    assert_eq!(csv.lines().count(), 8);
    let snaps = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "pfield"))
        .count();
    assert_eq!(snaps, 4);

    let snap = out.join("snapshot_000006.pfield");
    let o = elastica(&["contour", snap.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "components"), 1.0);
}

#[test]
fn energy_of_bundled_circle_snapshot() {
    let snap = configs().join("circle_r05.pfield");
    let cfg = configs().join("circle1.cfg");
    let o = elastica(&["energy", snap.to_str().unwrap(), cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = field(&stdout(&o), "L ");
    assert!((l - std::f64::consts::PI).abs() < 0.01 * std::f64::consts::PI, "L = {l}");
}

#[test]
fn bad_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, SMALL.replace("grid.n = 48", "grid.n = banana")).unwrap();
    let o = elastica(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let o = elastica(&["contour", dir.path().join("missing.pfield").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.cfg");
    std::fs::write(&cfg, format!("{SMALL}energy.epsilonn = 0.05\n")).unwrap();
    let o = elastica(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
