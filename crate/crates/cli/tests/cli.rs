use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use drift_cli::config::load;
use drift_cli::experiment::{execute, run_experiment};
use drift_cli::report::{read_json, Verdict};
use drift_cli::suite::{quick_suite, quick_suite_with};
use drift_core::rng::StepRng;
use drift_core::Process;

const COUPON: &str = r#"
name = "coupon"
process = "coupon(n=20)"

[simulation]
seed = 7
trials = 2000

[[theorem]]
id = "mult.upper"
delta = 0.05

[output]
csv = "out.csv"
json = "out.json"
"#;

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, text).unwrap();
    path
}

fn drift() -> Command {
    Command::new(env!("CARGO_BIN_EXE_drift"))
}

#[test]
fn coupon_row_matches_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let result = run_experiment(&write_config(dir.path(), COUPON)).unwrap();
    let row = &result.rows[0];
    assert!((row.bound.unwrap() - 79.9146454711).abs() < 1e-9);
    assert!((row.oracle.unwrap() - 71.9547931429).abs() < 1e-9);
    assert_eq!(row.verdict, Verdict::Holds);
    assert!(row.preconditions.contains("D=pass"));

    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("theorem_id,direction,bound,oracle,sim_mean,sim_ci_lo,sim_ci_hi,preconditions,verdict\n"));
    assert_eq!(read_json(&dir.path().join("out.json")).unwrap(), result.rows);
}

#[test]
fn streak_bound_is_tight() {
    let text = r#"
process = "winning_streak(k=3)"
potential = "streak(k=3)"
[simulation]
seed = 1
trials = 1000
[[theorem]]
id = "additive.upper"
delta = 1
"#;
    let dir = tempfile::tempdir().unwrap();
    let result = execute(&load(&write_config(dir.path(), text)).unwrap()).unwrap();
    assert_eq!(result.rows[0].bound, Some(14.0));
    assert_eq!(result.rows[0].oracle, Some(14.0));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), COUPON);
    run_experiment(&path).unwrap();
    let first = fs::read(dir.path().join("out.csv")).unwrap();
    run_experiment(&path).unwrap();
    assert_eq!(first, fs::read(dir.path().join("out.csv")).unwrap());
}

#[test]
fn plot_data_is_long_format() {
    let text = r#"
process = "onemax(n=20)"
[simulation]
seed = 3
trials = 200
[[theorem]]
id = "budget.var"
h = "onemax(n=20)"
X0 = 10
t = 30
[output]
plot = "plot.csv"
"#;
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&write_config(dir.path(), text)).unwrap();
    let plot = fs::read_to_string(dir.path().join("plot.csv")).unwrap();
    let mut lines = plot.lines();
    assert_eq!(lines.next(), Some("series,x,y,ci_lo,ci_hi"));
    let series: std::collections::BTreeSet<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert!(series.contains("sim_mean") && series.contains("budget.var bound"), "{series:?}");
}

#[test]
fn unknown_theorem_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &COUPON.replace("mult.upper", "mult.upperr"));
    let out = drift().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mult.upperr") && err.contains("experiment.toml:10:"), "{err}");
}

#[test]
fn syntax_error_has_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "process = \"coupon(n=3)\"\n[simulation\n");
    let out = drift().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiment.toml:2:"));
}

#[test]
fn run_prints_csv_and_verdict_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let out = drift().arg("run").arg(write_config(dir.path(), COUPON)).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let verdict = line.rsplit(',').next().unwrap();
        assert!(["holds", "violated", "indeterminate"].contains(&verdict), "{line}");
    }
}

#[test]
fn bound_and_oracle_subcommands() {
    let out = drift().args(["bound", "mult.upper", "--params", "E_X0=20", "delta=0.05"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["bound"].as_f64().unwrap() - 79.91464547107982).abs() < 1e-9);

    let out = drift().args(["oracle", "coupon(n=20)"]).output().unwrap();
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - 71.95479314287363).abs() < 1e-9);

    let out = drift().args(["bound", "mult.upper", "--params", "E_X0=20", "delta=0.05", "bogus=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quick_suite_passes() {
    let outcome = quick_suite().unwrap();
    assert_eq!(outcome.exit_code(), 0);
    assert!(outcome.criteria.iter().all(|c| c.passed()));
}

/// A coupon collector whose steps go the wrong way.
struct Backwards;

impl Process for Backwards {
    type State = i64;

    fn initial(&self, _: &mut StepRng) -> i64 {
        20
    }

    fn step(&self, x: &i64, rng: &mut StepRng) -> i64 {
        if rng.bernoulli(0.5) {
            x + 1
        } else {
            *x
        }
    }

    fn value(&self, x: &i64) -> f64 {
        *x as f64
    }

    fn is_target(&self, x: &i64) -> bool {
        *x == 0
    }

    fn describe(&self) -> String {
        "backwards coupon".into()
    }
}

#[test]
fn quick_suite_catches_a_broken_process() {
    let outcome = quick_suite_with(Arc::new(Backwards)).unwrap();
    assert!(outcome.any_violated());
    assert_eq!(outcome.exit_code(), 1);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            load(&path).unwrap_or_else(|e| panic!("{e}"));
            seen += 1;
        }
    }
    assert!(seen >= 2);
}
