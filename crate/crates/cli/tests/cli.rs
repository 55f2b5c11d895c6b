use std::process::{Command, Output};

use serde_json::Value;

fn gflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gflow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const HOPF_RUN: [&str; 11] = ["flow", "--scenario", "hopf", "--A", "1", "--B", "1", "--dt", "1e-4", "--t-max", "0.2"];

#[test]
fn hopf_flow_csv() {
    let o = gflow(&HOPF_RUN);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,A,B"));
    assert_eq!(lines.next(), Some("0,1,1"));
    assert!(text.trim_end().lines().last().unwrap().starts_with("# scenario=hopf"));
    assert!(text.contains("termination=horizon"));
    let data = rows(&text);
    assert_eq!(data.len(), 2001);
    let last = data.last().unwrap();
    assert!((last[1] / last[2] - 1.0).abs() <= 1e-3);
    assert!((last[0] - 0.2).abs() < 1e-12);
}

#[test]
fn dual_columns_and_residual() {
    let mut args = HOPF_RUN.to_vec();
    args.push("--dual");
    let o = gflow(&args);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("t,A,B,Abar,Bbar,commutation_residual\n"));
    for r in rows(&text) {
        assert_eq!(r.len(), 6);
        assert!(r[5] <= 1e-6);
        assert!((r[1] * r[3] - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn flow_is_deterministic_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "cpn", "A": 0.7, "B": 2.0, "n": 2, "lambda": 1.5, "dt": 0.01, "t_max": 0.5, "seed": 9, "dual": true}"#,
    )
    .unwrap();
    let o = gflow(&["flow", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read_to_string(&out).unwrap();
    assert!(first.contains("seed=9"));
    assert!(first.contains("scenario=cpn n=2 lambda=1.5"));
    gflow(&["flow", "--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn extinction_is_recorded() {
    let o = gflow(&["flow", "--scenario", "hopf", "--A", "1", "--B", "1", "--t-max", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("termination=extinction"));
}

#[test]
fn invalid_flow_configs() {
    for args in [
        vec!["flow", "--scenario", "hopf", "--A", "-1", "--B", "1", "--t-max", "1"],
        vec!["flow", "--scenario", "hopf", "--A", "1", "--B", "1", "--t-max", "1", "--dt", "0"],
        vec!["flow", "--scenario", "torus", "--A", "1", "--B", "1", "--t-max", "1"],
        vec!["flow", "--scenario", "cpn", "--n", "3", "--A", "1", "--B", "1", "--t-max", "1"],
        vec!["flow", "--scenario", "hopf", "--A", "1", "--B", "1"],
    ] {
        assert_eq!(gflow(&args).status.code(), Some(2), "{args:?}");
    }
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn dualize_fibre_length() {
    let o = gflow(&["dualize", "--phi", "2"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["phi"], 0.5);
    assert_eq!(gflow(&["dualize", "--phi", "0"]).status.code(), Some(2));
    assert_eq!(gflow(&["dualize", "--phi", "-1"]).status.code(), Some(2));
    assert_eq!(gflow(&["dualize", "--json", "{\"phi\": 1, \"a\": [1], \"eta\": [1, 2]}"]).status.code(), Some(2));
}

#[test]
fn dualize_exchanges_connection_and_offset() {
    let o = gflow(&["dualize", "--json", r#"{"phi": 2, "a": [0.5, 0], "eta": [0, 0.25]}"#]);
    let v = json(&o);
    assert_eq!(v["a"], serde_json::json!([0.0, 0.25]));
    assert_eq!(v["eta"], serde_json::json!([0.5, 0.0]));
    // μ̄ = −η∧a has μ̄_{01} = −(η₀a₁ − η₁a₀).
    assert_eq!(v["mu"][0][1], 0.125);
    assert_eq!(v["mu"][1][0], -0.125);
}

/// Every number as an `f64`, so `1` and `1.0` compare equal.
fn canonical(v: &Value) -> Value {
    match v {
        Value::Number(n) => Value::from(n.as_f64().unwrap()),
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), canonical(v))).collect()),
        other => other.clone(),
    }
}

#[test]
fn dualize_twice() {
    let dir = tempfile::tempdir().unwrap();
    let input = r#"{"phi": 2.5, "a": [0.5, -0.25], "h": [[2, 0.5], [0.5, 1]], "eta": [0.125, 1], "mu": [[0, 0.75], [-0.75, 0]]}"#;
    let path = dir.path().join("in.json");
    std::fs::write(&path, input).unwrap();
    let o = gflow(&["dualize", "--config", path.to_str().unwrap(), "--twice"]);
    assert!(o.status.success());
    let expect: Value = serde_json::from_str(input).unwrap();
    assert_eq!(json(&o), canonical(&expect));

    let irregular = r#"{"phi": 1.2345678901234, "a": [0.3, -0.7, 0.11], "eta": [0.9, 0.13, -0.41],
        "mu": [[0, 0.2, -0.3], [-0.2, 0, 0.7], [0.3, -0.7, 0]]}"#;
    let o = gflow(&["dualize", "--json", irregular, "--twice"]);
    let got = json(&o);
    let expect: Value = serde_json::from_str(irregular).unwrap();
    assert!((got["phi"].as_f64().unwrap() - 1.2345678901234).abs() <= 1e-15);
    for key in ["a", "eta"] {
        for (g, e) in got[key].as_array().unwrap().iter().zip(expect[key].as_array().unwrap()) {
            assert_eq!(g, &Value::from(e.as_f64().unwrap()));
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let d = got["mu"][i][j].as_f64().unwrap() - expect["mu"][i][j].as_f64().unwrap();
            assert!(d.abs() <= 1e-15);
        }
    }
}

#[test]
fn dualize_hopf() {
    let o = gflow(&["dualize", "--hopf", "--A", "0.5", "--B", "2"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["phi"], 2.0);
    for key in ["a", "eta"] {
        assert!(v[key].as_array().unwrap().iter().all(|x| x.as_f64() == Some(0.0)));
    }
    let mu = v["mu"].as_array().unwrap();
    assert!(mu.iter().flat_map(|r| r.as_array().unwrap()).all(|x| x.as_f64().unwrap() == 0.0));
    let h = &v["h"];
    assert_eq!(h[0][0], h[1][1]);
    assert_eq!(h[0][1], 0.0);
}

#[test]
fn verify_commutation() {
    let o = gflow(&["verify", "--suite", "commutation", "--seed", "7", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let table: Vec<&str> = text.lines().filter(|l| l.starts_with("commutation ")).collect();
    assert_eq!(table.len(), 5);
    for row in table {
        let cols: Vec<&str> = row.split_whitespace().collect();
        let residual: f64 = cols[cols.len() - 3].parse().unwrap();
        assert!(residual <= 1e-8, "{row}");
        assert_eq!(cols[cols.len() - 1], "PASS");
    }
    let again = gflow(&["verify", "--suite", "commutation", "--seed", "7", "--n", "100"]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn verify_courant() {
    let o = gflow(&["verify", "--suite", "courant", "--n", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.contains("GRF equivalence (random)")).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert!(cols[cols.len() - 3].parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn omitting_the_dilaton_fails() {
    let o = gflow(&["verify", "--suite", "commutation", "--n", "20", "--omit-dilaton"]);
    assert_eq!(o.status.code(), Some(1));
    let worst = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("commutation "))
        .map(|l| {
            let cols: Vec<&str> = l.split_whitespace().collect();
            cols[cols.len() - 3].parse::<f64>().unwrap()
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-3);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(gflow(&["verify", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(gflow(&["frobnicate"]).status.code(), Some(2));
}
