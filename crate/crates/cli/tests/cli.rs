use std::path::Path;
use std::process::{Command, Output};

use cbound::dominance::{discretize, xi_zero_mean};
use cbound::parse_dist;
use serde_json::Value;

fn cbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbound")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = cbound(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

fn write_strategy(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bound_examples() {
    let v = json(&["bound", "freedman-poisson", "--x", "0", "--v2", "1"]);
    assert_eq!(v["bound"], 1.0);
    assert_eq!(v["config"]["v2"], 1.0);

    let v = json(&["bound", "chernoff", "--x", "2", "--dist", "gauss:mu=0,sd=1"]);
    let b = v["bound"].as_f64().unwrap();
    assert!((b - (-2.0f64).exp()).abs() <= 1e-9, "{b}");

    let v = json(&["bound", "azuma5", "--x", "3", "--v", "1"]);
    let b = v["bound"].as_f64().unwrap();
    // 5!(e/5)^5 Q(3) with Q(3) = 1.3498980316300946e-3
    assert!(b <= 5.699 * 1.349_898_031_630_094_6e-3, "{b}");
    assert!(b <= v["cap_gauss"].as_f64().unwrap());
}

#[test]
fn csv_output_carries_config() {
    let out = cbound(&["--format", "csv", "bound", "fan", "--x", "1", "--n", "4", "--v2", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# command: bound"));
    assert!(lines.next().unwrap().starts_with("# config: {\"method\":\"fan\""));
    assert!(lines.next().unwrap().starts_with("method,raw,bound,optimizer,status"));
}

#[test]
fn sweep_is_sorted_and_ordered() {
    let out = cbound(&[
        "--format", "csv", "sweep", "--methods", "freedman-binom,fan", "--x-grid", "0:3:0.5", "--n", "8", "--v2", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 14);
    let keys: Vec<(f64, String)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    assert_eq!(keys, sorted);
    for pair in rows.chunks(2) {
        assert_eq!((pair[0][1].as_str(), pair[1][1].as_str()), ("fan", "freedman-binom"));
        let (fan, fb): (f64, f64) = (pair[0][2].parse().unwrap(), pair[1][2].parse().unwrap());
        assert!(fb <= fan * (1.0 + 1e-12), "{pair:?}");
    }
    let single = cbound(&["--format", "csv", "sweep", "--methods", "fan", "--x-grid", "0:0:1", "--n", "2", "--v2", "1"]);
    assert_eq!(csv_rows(&single).len(), 1);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["sweep", "--methods", "", "--x-grid", "0:1:1", "--v2", "1"][..],
        &["sweep", "--methods", "fan", "--x-grid", "1:0:1", "--n", "2", "--v2", "1"],
        &["sweep", "--methods", "fan", "--x-grid", "0:1", "--n", "2", "--v2", "1"],
        &["sweep", "--methods", "nope", "--x-grid", "0:1:1"],
        &["bound", "chernoff", "--x", "1", "--bogus"],
        &["bound", "chernoff", "--x", "1", "--dist", "gauss:mu=0,sd=x"],
        &["bound", "fan", "--x", "1"],
        &["qalpha", "--dist", "gauss:sd=1", "--delta", "1.5"],
    ] {
        let out = cbound(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(cbound(&["--help"]).status.code(), Some(0));
    assert_eq!(cbound(&["--version"]).status.code(), Some(0));
}

#[test]
fn verify_dp_single_coin() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_strategy(dir.path(), "s.json", r#"{"horizon": 1, "iid": {"law": "twopoint:a=-1,b=1,p=0.5"}}"#);
    let v = json(&["verify", "dp", "--strategy", &s, "--event", "freedman", "--x", "1", "--v2", "1"]);
    assert_eq!(v["exact"], 0.5);
    assert_eq!(v["pass"], true);
    let bad = write_strategy(dir.path(), "bad.json", r#"{"horizon": 1}"#);
    let out = cbound(&["verify", "dp", "--strategy", &bad, "--event", "freedman", "--x", "1", "--v2", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_mc_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_strategy(dir.path(), "s.json", r#"{"horizon": 4, "iid": {"law": {"values": [-0.25, 1], "probs": [0.8, 0.2]}}}"#);
    let args = ["--seed", "7", "verify", "mc", "--strategy", &s, "--event", "freedman", "--x", "1", "--v2", "1", "--trials", "200000"];
    let a = cbound(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_cbound")).args(args).env("CBOUND_THREADS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let est = v["estimate"].as_f64().unwrap();
    assert!((est - 0.2832).abs() <= 4.0 * (0.2832f64 * 0.7168 / 2e5).sqrt(), "{est}");
    let bad = Command::new(env!("CARGO_BIN_EXE_cbound")).args(args).env("CBOUND_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn probe_reports_within_bound() {
    let v = json(&["probe", "--family", "front-loading", "--n", "2", "--budget", "100", "--event", "azuma", "--x", "1", "--v2", "1"]);
    assert_eq!(v["within_bound"], true);
    assert!(v["prob"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
    let v = json(&["verify", "probe", "--family", "two-point", "--n", "3", "--budget", "64", "--x", "1", "--v2", "1", "--y", "1"]);
    assert_eq!(v["candidate"], false);
}

#[test]
fn majorant_hull_and_value() {
    let out = cbound(&["--format", "csv", "majorant", "--survival", "1,0.1,0.09,0.001"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    let hull: Vec<(f64, f64)> = rows.iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    assert_eq!(hull.first(), Some(&(0.0, 1.0)));
    assert!(hull.iter().all(|&(x, _)| x != 1.0));
    let v = json(&["majorant", "--survival", "1,0.1,0.09,0.001", "--x", "2"]);
    assert!((v["majorant"].as_f64().unwrap() - 0.09).abs() <= 1e-12);
    let v = json(&["majorant", "--v2", "1", "--x", "2"]);
    // P(Poisson(1) >= 3)
    let exact = 1.0 - (-1.0f64).exp() * 2.5;
    assert!((v["majorant"].as_f64().unwrap() - exact).abs() <= 1e-12);
}

#[test]
fn xi_lattice_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("xi.csv");
    let (t, w) = ("gauss:mu=-1,sd=1", "gauss:mu=1,sd=1");
    let v = json(&["xi", "--t", t, "--w", w, "--step", "0.01", "--out", file.to_str().unwrap()]);
    assert!(v["mean"].as_f64().unwrap().abs() <= 1e-9);

    let expected = discretize(&xi_zero_mean(&parse_dist(t).unwrap(), &parse_dist(w).unwrap()).unwrap().to_dist(), 0.01).unwrap();
    let back = parse_dist(&format!("lattice:file={}", file.display())).unwrap();
    for alpha in [1.0, 2.0, 5.0] {
        for s in [-2.0, -0.5, 0.0, 0.7, 2.5] {
            let (a, b) = (expected.plus_moment(s, alpha).unwrap(), back.plus_moment(s, alpha).unwrap());
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300) || (a - b).abs() <= 1e-15, "alpha={alpha} s={s}: {a} vs {b}");
        }
    }
}

#[test]
fn doob_sum_passes() {
    let v = json(&["verify", "doob", "--kind", "sum", "--n", "10", "--x", "3", "--trials", "50000"]);
    assert_eq!(v["pass"], true);
    assert!(v["ci_upper"].as_f64().unwrap() <= v["bound"].as_f64().unwrap());
}
