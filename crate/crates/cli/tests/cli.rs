use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const OPEN: &[&str] = &["--L", "2", "--q", "0.5", "--rates", "0.6,0.7,0.2,0.1", "--mu", "0.3"];

fn qasep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qasep"))
        .args(args)
        .env_remove("QASEP_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn run(args: Vec<String>) -> Output {
    qasep(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn check_residual(doc: &Value, check: &str, name: &str) -> f64 {
    doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == check && c["name"] == name)
        .unwrap_or_else(|| panic!("no {check}/{name}"))["residual"]
        .as_f64()
        .unwrap()
}

#[test]
fn full_open_suite_passes() {
    let out = run(with(&["verify", "--all"], OPEN));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.len() > 20);
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
    }
    for name in ["transfer", "pq"] {
        assert!(check_residual(&doc, "commutation", name) < 1e-7);
    }
}

#[test]
fn full_ring_suite_passes() {
    let out = qasep(&["verify", "--all", "--L", "4", "--q", "0.3", "--periodic", "--particles", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<_> = json(&out)["checks"].as_array().unwrap().iter().map(|c| c["check"].clone()).collect();
    assert!(!names.contains(&Value::from("exchange")));
}

#[test]
fn exchange_at_equal_arguments_vanishes() {
    let out = run(with(&["verify", "--check", "exchange", "--x", "0.2", "--y", "0.2"], OPEN));
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(check_residual(&doc, "exchange", "ut"), 0.0);
    assert_eq!(check_residual(&doc, "exchange", "tu"), 0.0);
}

#[test]
fn inactive_reservoirs_are_a_domain_error() {
    let out = qasep(&["verify", "--all", "--L", "3", "--tasep", "--alpha", "0", "--beta", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(qasep(&["verify", "--all"]).status.code(), Some(2));
    assert_eq!(qasep(&["cumulants", "--L", "2"]).status.code(), Some(2));
    assert_eq!(qasep(&["verify", "--L", "2", "--rates", "1,1,0"]).status.code(), Some(2));
    assert_eq!(run(with(&["verify", "--check", "exchange", "--periodic", "--particles", "1"], &["--L", "2"])).status.code(), Some(2));
}

#[test]
fn residual_failure_exits_one() {
    let out = run(with(&["verify", "--check", "decomposition", "--tol", "1e-300"], OPEN));
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn single_site_cumulants() {
    let out = qasep(&["cumulants", "--L", "1", "--tasep", "--alpha", "1", "--beta", "1", "--orders", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let c = &json(&out)["cumulants"];
    let (bethe, oracle) = (floats(&c["bethe"]), floats(&c["oracle"]));
    for (k, want) in [0.5, 0.25, 0.125].into_iter().enumerate() {
        assert!((bethe[k] - want).abs() < 1e-9, "{bethe:?}");
        assert!((oracle[k] - bethe[k]).abs() < 1e-9, "{oracle:?}");
    }
}

#[test]
fn both_columns_agree() {
    let out = qasep(&["cumulants", "--L", "3", "--q", "0.3", "--rates", "0.6,0.7,0.2,0.1", "--orders", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let c = &json(&out)["cumulants"];
    assert_eq!(floats(&c["oracle"]).len(), 3);
    assert!(floats(&c["rel_diff"]).iter().all(|d| *d < 1e-6));
}

#[test]
fn zero_orders_give_an_empty_table() {
    let out = qasep(&["cumulants", "--L", "2", "--tasep", "--alpha", "1", "--beta", "1", "--orders", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let c = &json(&out)["cumulants"];
    assert!(c["bethe"].as_array().unwrap().is_empty());
}

#[test]
fn text_output_lists_every_order() {
    let out = qasep(&["cumulants", "--L", "2", "--q", "0.3", "--rates", "0.6,0.7,0.2,0.1", "--orders", "2", "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("2  ")), "{text}");
}

#[test]
fn json_file_has_no_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(with(&["verify", "--check", "lax", "--json", path.to_str().unwrap()], OPEN));
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(written.get("seconds").is_none());
    assert!(json(&out).get("seconds").is_some());
    assert_eq!(written["input"]["rates"], serde_json::json!([0.6, 0.7, 0.2, 0.1]));
}

fn steady_in(dir: &Path) -> Output {
    run(with(&["steady", "--out-dir", dir.to_str().unwrap()], &["--L", "3", "--q", "0.3", "--rates", "0.6,0.7,0.2,0.1"]))
}

#[test]
fn steady_state_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(steady_in(dir.path()).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("steady_state.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("config,weight,probability"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 8);
    let total: f64 = rows.iter().map(|r| r.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-14);
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("steady_state.json")).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["input"]["l"], 3);
}

#[test]
fn steady_needs_an_open_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = qasep(&["steady", "--L", "3", "--periodic", "--particles", "1", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_matches_cumulants() {
    let dir = tempfile::tempdir().unwrap();
    let system = ["--L", "3", "--q", "0.3", "--rates", "0.6,0.7,0.2,0.1", "--orders", "2"];
    let out = Command::new(env!("CARGO_BIN_EXE_qasep"))
        .arg("export")
        .args(system)
        .env("QASEP_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w_series.json")).unwrap()).unwrap();
    let c1 = doc["cumulants"]["bethe"][0].as_f64().unwrap();
    let direct = run(with(&["cumulants", "--no-oracle"], &system));
    assert_eq!(c1, floats(&json(&direct)["cumulants"]["bethe"])[0]);
    let csv = fs::read_to_string(dir.path().join("w_series.csv")).unwrap();
    assert!(csv.starts_with("order,index,z_re,z_im,w_re,w_im\n"));
    let grid = doc["input"]["settings"]["grid_used"].as_u64().unwrap() as usize;
    assert_eq!(csv.lines().count(), 1 + 2 * grid);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(steady_in(d.path()).status.code(), Some(0));
        let out = run(with(
            &["export", "--orders", "2", "--out-dir", d.path().to_str().unwrap()],
            &["--L", "2", "--periodic", "--particles", "1", "--q", "0.2"],
        ));
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["steady_state.csv", "steady_state.json", "w_series.csv", "w_series.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
