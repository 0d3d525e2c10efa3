use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrl_core::compile::Schedule;
use qrl_core::gaussian::{ComplexUnitary, RealMatrixJson};
use qrl_core::teleport::MacronodeAngles;
use tempfile::TempDir;

fn qrlc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrlc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a random target of the given kind and returns its path.
fn random_target(dir: &TempDir, kind: &str, modes: usize, seed: u64) -> PathBuf {
    let p = path(dir, &format!("{kind}-{modes}-{seed}.json"));
    let o = qrlc(&["random", "--target-kind", kind, "--modes", &modes.to_string(), "--seed", &seed.to_string(), "--output", s(&p)]);
    assert_eq!(code(&o), 0);
    p
}

fn compile(dir: &TempDir, target: &Path, kind: &str, layout: &str) -> (PathBuf, Output) {
    let out = path(dir, &format!("{kind}-{layout}-schedule.json"));
    let o = qrlc(&["compile", "--input", s(target), "--target-kind", kind, "--layout", layout, "--output", s(&out)]);
    (out, o)
}

#[test]
fn compile_reports_counts_and_footprint() {
    let dir = TempDir::new().unwrap();
    let u = random_target(&dir, "unitary", 4, 3);
    let (sched, o) = compile(&dir, &u, "unitary", "triangular");
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("beamsplitter 6\n"), "{text}");
    assert!(text.contains("phase 4\n"), "{text}");
    assert!(text.contains("footprint 4 x 4\n"), "{text}");
    // Byte-stable round trip.
    let written = std::fs::read_to_string(&sched).unwrap();
    assert_eq!(Schedule::from_json(&written).unwrap().to_json().unwrap(), written);
}

#[test]
fn compile_shear_counts() {
    let dir = TempDir::new().unwrap();
    let k = random_target(&dir, "shear", 3, 8);
    let (_, o) = compile(&dir, &k, "shear", "triangular");
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("shear-pair 3\n") && text.contains("shear 3\n"), "{text}");
}

#[test]
fn compile_bogoliubov_verifies() {
    let dir = TempDir::new().unwrap();
    let b = random_target(&dir, "bogoliubov", 3, 2);
    let (sched, o) = compile(&dir, &b, "bogoliubov", "triangular");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = qrlc(&["verify", "--input", s(&sched), "--target", s(&b), "--target-kind", "bogoliubov", "--tolerance", "1e-7"]);
    assert_eq!(code(&v), 0, "{}", stdout(&v));
}

#[test]
fn parse_and_validation_failures_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (_, o) = compile(&dir, &bad, "unitary", "triangular");
    assert_eq!(code(&o), 2);

    let not_unitary = path(&dir, "nu.json");
    std::fs::write(&not_unitary, r#"{"dim": 2, "entries": [[1,0],[1,0],[0,0],[1,0]]}"#).unwrap();
    let (_, o) = compile(&dir, &not_unitary, "unitary", "triangular");
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let asym = path(&dir, "asym.json");
    std::fs::write(&asym, r#"{"modes": 2, "entries": [1, 2, 3, 4]}"#).unwrap();
    let (_, o) = compile(&dir, &asym, "shear", "triangular");
    assert_eq!(code(&o), 1);

    let missing = path(&dir, "missing.json");
    let (_, o) = compile(&dir, &missing, "unitary", "triangular");
    assert_eq!(code(&o), 2);

    let u = random_target(&dir, "unitary", 2, 1);
    let o = qrlc(&["compile", "--input", s(&u), "--output", s(&path(&dir, "x.json")), "--tolerance", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_passes_fresh_and_fails_perturbed() {
    let dir = TempDir::new().unwrap();
    let u = random_target(&dir, "unitary", 3, 11);
    for layout in ["triangular", "rectangular"] {
        let (sched, _) = compile(&dir, &u, "unitary", layout);
        let o = qrlc(&["verify", "--input", s(&sched), "--target", s(&u)]);
        assert_eq!(code(&o), 0);
        let dev: f64 = stdout(&o).lines().next().unwrap().strip_prefix("deviation ").unwrap().parse().unwrap();
        assert!(dev < 1e-8);

        let mut schedule = Schedule::from_json(&std::fs::read_to_string(&sched).unwrap()).unwrap();
        let beamsplitter = schedule.instructions.iter_mut().find(|i| i.wires_in.len() == 2).unwrap();
        let mut a = beamsplitter.angles.to_array();
        a[0] += 1e-3;
        beamsplitter.angles = MacronodeAngles::from_array(a);
        let perturbed = path(&dir, "perturbed.json");
        std::fs::write(&perturbed, schedule.to_json().unwrap()).unwrap();
        let o = qrlc(&["verify", "--input", s(&perturbed), "--target", s(&u)]);
        assert_eq!(code(&o), 1);
        let dev: f64 = stdout(&o).lines().next().unwrap().strip_prefix("deviation ").unwrap().parse().unwrap();
        assert!(dev > 1e-6);
        assert!(stdout(&o).contains("FAIL"));
    }
}

#[test]
fn empty_schedule_matches_identity() {
    let dir = TempDir::new().unwrap();
    let sched = path(&dir, "empty.json");
    std::fs::write(&sched, Schedule::empty(3).to_json().unwrap()).unwrap();
    let id = path(&dir, "id.json");
    std::fs::write(&id, serde_json::to_string(&ComplexUnitary::identity(3).to_json()).unwrap()).unwrap();
    let o = qrlc(&["verify", "--input", s(&sched), "--target", s(&id)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("deviation 0e0\n"));

    let svg = qrlc(&["layout", "--input", s(&sched), "--format", "svg"]);
    assert_eq!(code(&svg), 0);
    let text = stdout(&svg);
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert!(!text.contains("<g "));
}

#[test]
fn structural_schedule_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let u = random_target(&dir, "unitary", 2, 4);
    let (sched, _) = compile(&dir, &u, "unitary", "triangular");
    let mut schedule = Schedule::from_json(&std::fs::read_to_string(&sched).unwrap()).unwrap();
    schedule.instructions[1].site += 7;
    let text = serde_json::to_string(&schedule).unwrap();
    let broken = path(&dir, "broken.json");
    std::fs::write(&broken, text).unwrap();
    let o = qrlc(&["verify", "--input", s(&broken), "--target", s(&u)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("site"));

    // Target of the wrong size.
    let u3 = random_target(&dir, "unitary", 3, 4);
    let o = qrlc(&["verify", "--input", s(&sched), "--target", s(&u3)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_is_deterministic_and_sweeps() {
    let dir = TempDir::new().unwrap();
    let u = random_target(&dir, "unitary", 2, 6);
    let (sched, _) = compile(&dir, &u, "unitary", "triangular");
    let run = |name: &str, extra: &[&str]| {
        let out = path(&dir, name);
        let mut args = vec!["simulate", "--input", s(&sched), "--output", s(&out), "--seed", "9"];
        args.extend_from_slice(extra);
        let o = qrlc(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.json", &["--r-db", "15"]);
    let b = run("b.json", &["--r-db", "15"]);
    assert_eq!(a, b);
    let report: serde_json::Value = serde_json::from_str(&a).unwrap();
    for key in ["r_db", "seed", "output_mean", "output_cov", "target_distance_frobenius", "nullifier_variances"] {
        assert!(report.get(key).is_some(), "{key}");
    }

    let sweep = run("sweep.json", &["--sweep", "10,15,20"]);
    let reports: Vec<serde_json::Value> = serde_json::from_str(&sweep).unwrap();
    assert_eq!(reports.len(), 3);
    let d: Vec<f64> = reports.iter().map(|r| r["target_distance_frobenius"].as_f64().unwrap()).collect();
    assert!(d[0] > d[1] && d[1] > d[2]);
    assert!((d[2] / d[0] - 0.1).abs() < 1e-9);

    let o = qrlc(&["simulate", "--input", s(&sched), "--r-db=-1"]);
    assert_eq!(code(&o), 1);

    let with_target = run("t.json", &["--target", s(&u), "--r-db", "15"]);
    let t: serde_json::Value = serde_json::from_str(&with_target).unwrap();
    let d_self = report["target_distance_frobenius"].as_f64().unwrap();
    assert!((t["target_distance_frobenius"].as_f64().unwrap() - d_self).abs() < 1e-9);
}

#[test]
fn layout_shapes() {
    let dir = TempDir::new().unwrap();
    let u = random_target(&dir, "unitary", 4, 2);
    let (tri, _) = compile(&dir, &u, "unitary", "triangular");
    let o = qrlc(&["layout", "--input", s(&tri)]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.contains('|')).collect();
    assert_eq!(rows.len(), 4);
    // Row i holds 4 - i nodes and starts with a phase node on the diagonal.
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split('|').nth(1).unwrap().split_whitespace().collect();
        let nodes: Vec<&&str> = cells.iter().filter(|c| **c != ".").collect();
        assert_eq!(nodes.len(), 4 - i, "{row}");
        assert!(nodes[0].starts_with('P'));
        assert_eq!(cells.iter().position(|c| c.starts_with('P')), Some(i));
    }

    let (rect, _) = compile(&dir, &u, "unitary", "rectangular");
    let svg_path = path(&dir, "rect.svg");
    let o = qrlc(&["layout", "--input", s(&rect), "--format", "svg", "--output", s(&svg_path)]);
    assert_eq!(code(&o), 0);
    let svg = std::fs::read_to_string(svg_path).unwrap();
    assert_eq!(svg.matches("class=\"beamsplitter\"").count(), 6);
    assert!(svg.matches("class=\"phase\"").count() > 0);

    let o = qrlc(&["layout", "--input", s(&rect), "--format", "json"]);
    assert_eq!(Schedule::from_json(stdout(&o).trim_end()).unwrap(), Schedule::from_json(&std::fs::read_to_string(&rect).unwrap()).unwrap());
}

#[test]
fn random_targets_parse() {
    let dir = TempDir::new().unwrap();
    let k = random_target(&dir, "shear", 4, 5);
    let j: RealMatrixJson = serde_json::from_str(&std::fs::read_to_string(k).unwrap()).unwrap();
    assert_eq!(j.modes, 4);
    assert!(j.entries.iter().all(|v| v.abs() <= 3.0));
    let a = qrlc(&["random", "--modes", "3", "--seed", "5"]);
    let b = qrlc(&["random", "--modes", "3", "--seed", "5"]);
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(code(&qrlc(&["random", "--modes", "0"])), 1);
    assert_eq!(code(&qrlc(&["bogus"])), 2);
}
