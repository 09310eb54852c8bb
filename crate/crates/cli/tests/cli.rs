use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn compat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn radius_of_a_constructed_tetrahedron() {
    let dir = tempfile::tempdir().unwrap();
    let povm = dir.path().join("tet.json");
    let out = compat(&["construct", "platonic", "--kind", "tetrahedron", "--out", path_str(&povm)]);
    assert!(out.status.success());

    let out = compat(&["radius", "--povm", path_str(&povm), "--oracle", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    assert_eq!(v["method"], "facet_general");
    assert!(v["oracle_dev"].as_f64().unwrap() < 1e-6);

    let out = compat(&["radius", "--povm", path_str(&povm), "--sym", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("value,witness_c0,"));
    let value: f64 = lines.next().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((value - 6f64.sqrt() / 6.0).abs() < 1e-12);
}

#[test]
fn invalid_povm_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"effects":[{"alpha":0.6,"eta":1,"n":[1,0,0]},{"alpha":0.5,"eta":1,"n":[-1,0,0]}]}"#,
    )
    .unwrap();
    let out = compat(&["validate", "--povm", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["valid"], false);
    assert_eq!(compat(&["radius", "--povm", path_str(&bad)]).status.code(), Some(2));

    fs::write(&bad, r#"{"effects":[{"alpha":1,"eta":0,"n":[2,0,0]}]}"#).unwrap();
    assert_eq!(compat(&["validate", "--povm", path_str(&bad)]).status.code(), Some(2));
}

#[test]
fn lhs_build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let parent = dir.path().join("p.json");
    let settings = dir.path().join("s.json");
    let model = dir.path().join("m.json");
    assert!(compat(&["construct", "rotsym", "--n", "3", "--out", path_str(&parent)]).status.success());
    fs::write(&settings, "[[1,0,0],[0,0,1],[0.6,0,0.8]]").unwrap();

    let out = compat(&[
        "lhs", "build", "--parent", path_str(&parent), "--r", "0.5", "--settings", path_str(&settings), "--out",
        path_str(&model),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(m["p"].as_array().unwrap().len(), 3);

    let out = compat(&["lhs", "verify", "--model", path_str(&model), "--r", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["max_dev"].as_f64().unwrap() <= 1e-9);

    let out = compat(&["lhs", "verify", "--model", path_str(&model), "--r", "0.4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = compat(&[
        "lhs", "build", "--parent", path_str(&parent), "--r", "0.51", "--settings", path_str(&settings),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn search_is_reproducible_and_writes_history() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let hist = dir.path().join("h.csv");
    let args = |out: &Path| {
        vec![
            "search".to_string(),
            "--n".into(),
            "4".into(),
            "--planar".into(),
            "--samples".into(),
            "16".into(),
            "--refine".into(),
            "10".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |out: &Path, extra: &[&str]| {
        let mut v = args(out);
        v.extend(extra.iter().map(|s| s.to_string()));
        Command::new(env!("CARGO_BIN_EXE_compat")).args(&v).output().unwrap()
    };
    assert!(run(&a, &["--history", path_str(&hist)]).status.success());
    assert!(Command::new(env!("CARGO_BIN_EXE_compat"))
        .args(args(&b))
        .env("COMPAT_THREADS", "1")
        .output()
        .unwrap()
        .status
        .success());
    assert_eq!(fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    let h = fs::read_to_string(&hist).unwrap();
    assert_eq!(h.lines().next(), Some("iteration,radius"));
    assert_eq!(h.lines().count(), 17);
}

#[test]
fn zero_time_budget_exits_with_budget_code() {
    let out = compat(&["search", "--n", "5", "--samples", "50", "--time-budget-ms", "0"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn table2_csv_has_reference_columns() {
    let out = compat(&[
        "reproduce", "table2", "--ns", "3,11,12", "--skip-search", "--restarts", "10", "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    for col in ["n", "status", "planar_symmetric_ref", "thomson_dev", "general_numeric_ref"] {
        assert!(headers.iter().any(|h| h == col), "missing {col}");
    }
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let field = |row: &csv::StringRecord, name: &str| row[headers.iter().position(|h| h == name).unwrap()].to_string();
    let ps: f64 = field(&rows[0], "planar_symmetric").parse().unwrap();
    assert!((ps - 0.5).abs() < 1e-12);
    assert_eq!(field(&rows[0], "thomson"), "0.0");
    assert_eq!(field(&rows[1], "status"), "infeasible");
    assert_eq!(field(&rows[1], "thomson"), "");
    let dev: f64 = field(&rows[2], "thomson_dev").parse().unwrap();
    assert!(dev < 1e-3, "{dev}");
}

#[test]
fn platonic_and_threshold_tables() {
    let out = compat(&["reproduce", "platonic"]);
    let rows = json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert!(rows[0]["dev_closed_form"].as_f64().unwrap() < 1e-12);

    let out = compat(&["reproduce", "table1", "--restarts", "5", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("infeasible") && text.contains("beyond_all_parents"));
    assert!(text.contains("0.3333"));
}

#[test]
fn bounds_csv() {
    let out = compat(&["bounds", "--n-max", "5", "--r", "0.55,0.6", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("name,at,value,kind"));
    assert_eq!(text.lines().filter(|l| l.starts_with("planar_cost_")).count(), 4);
}
