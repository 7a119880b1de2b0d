//! End-to-end tests of the `mcg-piston` binary.

use std::process::{Command, Output};

use mcg_piston::cli::{LimitDocument, ProfileDocument, SolveDocument, SweepDocument, ValidationDocument, SCHEMA};
use mcg_piston::setup::{ProfileSample, WaveKind};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcg-piston")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn solve_json_round_trips() {
    let text = stdout(&["solve", "--m0", "1", "--alpha", "0.5", "--theta", "0.5"]);
    assert!(text.trim_start().starts_with("{\n  \"schema\": \"mcg-piston/1\""));
    let doc: SolveDocument = serde_json::from_str(&text).unwrap();
    assert_eq!(doc.schema, SCHEMA);
    assert_eq!(doc.solution.rho1(), 3.0928625429485406);
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", text);
}

#[test]
fn profile_csv_and_json_agree_bitwise() {
    let base = ["profile", "--m0", "1", "--direction", "receding", "--samples", "64"];
    let csv = stdout(&base);
    let json = stdout(&[&base[..], &["--format", "json"]].concat());
    let (header, rows) = parse_csv(&csv);
    assert_eq!(header, ["xi", "rho", "u", "p"]);
    let from_csv: Vec<ProfileSample> = rows
        .iter()
        .map(|r| {
            let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
            ProfileSample { xi: v[0], rho: v[1], u: v[2], p: v[3] }
        })
        .collect();
    let doc: ProfileDocument = serde_json::from_str(&json).unwrap();
    assert_eq!(doc.wave_kind, WaveKind::Rarefaction1);
    assert_eq!(doc.samples.len(), 64);
    for (a, b) in from_csv.iter().zip(&doc.samples) {
        for (x, y) in [(a.xi, b.xi), (a.rho, b.rho), (a.u, b.u), (a.p, b.p)] {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(from_csv.last().unwrap().xi.to_bits(), 0f64.to_bits());
}

#[test]
fn concentration_profile_is_measure_limit() {
    let doc: ProfileDocument =
        serde_json::from_str(&stdout(&["profile", "--m0", "2", "--theta", "0", "--samples", "5", "--format", "json"])).unwrap();
    assert_eq!(doc.wave_kind, WaveKind::MeasureLimit);
    assert!(doc.samples.iter().all(|s| s.rho == 1.0 && s.p == -1.0));
}

#[test]
fn sweep_is_byte_identical_and_parses_back() {
    let args = ["sweep", "--m0", "1", "--alpha", "0.3", "--sweep", "m0", "--from", "0.05", "--to", "20", "--count", "64", "--log"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let (header, rows) = parse_csv(&a);
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r[4] == "ok"));

    let json = stdout(&[&args[..], &["--format", "json"]].concat());
    let doc: SweepDocument = serde_json::from_str(&json).unwrap();
    for (row, csv) in doc.rows.iter().zip(&rows) {
        assert_eq!(row.m0.to_bits(), csv[0].parse::<f64>().unwrap().to_bits());
        assert_eq!(row.rho1.unwrap().to_bits(), csv[6].parse::<f64>().unwrap().to_bits());
    }
}

#[test]
fn sweep_reports_row_failures_in_place() {
    // theta = 1 is outside the gas parameter range
    let text = stdout(&["sweep", "--m0", "1", "--sweep", "theta", "--from", "0.5", "--to", "1", "--count", "2"]);
    let (_, rows) = parse_csv(&text);
    assert_eq!(rows[0][4], "ok");
    assert_eq!(rows[1][4], "domain");
    assert_eq!(rows[1][6], "");
}

#[test]
fn limit_reports_classification() {
    let doc: LimitDocument = serde_json::from_str(&stdout(&["limit", "--m0", "1", "--alpha", "0.5"])).unwrap();
    assert!((doc.limit_rho1.unwrap() - 6.156325174).abs() < 1e-8);
    let doc: LimitDocument = serde_json::from_str(&stdout(&["limit", "--m0", "2", "--alpha", "0.5"])).unwrap();
    assert_eq!(doc.w_p_const, Some(1.0));
    let doc: LimitDocument = serde_json::from_str(&stdout(&["limit", "--m0", "3", "--alpha", "1", "--direction", "receding"])).unwrap();
    assert_eq!(doc.receding_rho1, Some(0.25));
}

#[test]
fn validate_passes_and_is_deterministic() {
    let args = ["validate", "--m0", "1", "--seed", "7"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let doc: ValidationDocument = serde_json::from_str(&a).unwrap();
    assert!(doc.passed);
    assert!(doc.checks.iter().any(|c| c.name == "fvm_l1_density"));

    let doc: ValidationDocument = serde_json::from_str(&stdout(&["validate", "--m0", "2", "--theta", "0"])).unwrap();
    assert!(doc.checks.iter().any(|c| c.name == "weak_form_residual" && c.passed));
}

#[test]
fn corrupted_golden_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    let garbage = dir.path().join("garbage.json");
    let good_s = good.to_str().unwrap();
    assert_eq!(code(&["solve", "--m0", "1", "--out", good_s]), 0);
    let text = std::fs::read_to_string(&good).unwrap();
    std::fs::write(&bad, text.replace("3.0928625429485406", "3.0928625429")).unwrap();
    std::fs::write(&garbage, "not json").unwrap();

    let base = ["validate", "--m0", "1", "--golden"];
    assert_eq!(code(&[&base[..], &[good_s]].concat()), 0);
    let out = run(&[&base[..], &[bad.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(6));
    let doc: ValidationDocument = serde_json::from_slice(&out.stdout).unwrap();
    let failed: Vec<_> = doc.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["golden_rho1"]);
    assert_eq!(code(&[&base[..], &[garbage.to_str().unwrap()]].concat()), 6);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["solve", "--m0", "-1"]), 2);
    assert_eq!(code(&["solve", "--m0", "1", "--alpha", "1.5"]), 2);
    assert_eq!(code(&["solve", "--m0", "1", "--theta", "1"]), 2);
    assert_eq!(code(&["solve"]), 2);
    assert_eq!(code(&["sweep", "--m0", "1", "--sweep", "m0", "--from", "1", "--to", "2", "--count", "0"]), 2);
    assert_eq!(code(&["sweep", "--m0", "1", "--sweep", "m0", "--from", "0", "--to", "2", "--count", "3", "--log"]), 2);
    assert_eq!(code(&["solve", "--m0", "1", "--alpha", "1", "--theta", "0.5", "--direction", "receding"]), 3);
    assert_eq!(code(&["solve", "--m0", "2", "--theta", "0"]), 5);
    assert_eq!(code(&["solve", "--m0", "1", "--out", "/nonexistent-dir/x.json"]), 1);
    assert_eq!(code(&["--help"]), 0);

    let out = run(&["solve", "--m0", "2", "--theta", "0"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(out.stdout.is_empty());
}
