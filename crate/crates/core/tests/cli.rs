use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn regtune(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regtune"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.display().to_string()
}

const GEN: [&str; 9] = ["gen", "--T", "4", "--d", "2", "--n", "8", "--nv", "3"];

#[test]
fn gen_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let mut args = GEN.to_vec();
        args.extend(["--seed", "7", "--out", out]);
        assert!(regtune(&args, dir.path()).status.success());
    }
    for f in ["instance.bin", "constants.json", "manifest.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    let m = read_json(&dir.path().join("a/manifest.json"));
    assert_eq!(m["tool"], "regtune");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config"]["T"], 4);
    assert_eq!(m["config"]["seed"], 7);
}

#[test]
fn zero_validation_size_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "gen.json", &json!({"T": 3, "n": 5, "n_v": 0}));
    let out = regtune(&["gen", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_v"));
}

#[test]
fn malformed_config_exits_2_and_missing_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(regtune(&["tune", "--config", "bad.json"], dir.path()).status.code(), Some(2));
    let cfg = write_config(dir.path(), "t.json", &json!({"instance": "nowhere.bin"}));
    assert_eq!(regtune(&["tune", "--config", &cfg], dir.path()).status.code(), Some(1));
    assert_eq!(regtune(&["gen", "--workers", "0"], dir.path()).status.code(), Some(2));
}

#[test]
fn tune_reloads_generated_constants() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = GEN.to_vec();
    args.extend(["--seed", "3", "--out", "g"]);
    assert!(regtune(&args, dir.path()).status.success());
    let cfg = write_config(dir.path(), "tune.json", &json!({"instance": "g/instance.bin"}));
    let out = regtune(&["tune", "--config", &cfg, "--out", "t"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read(dir.path().join("g/constants.json")).unwrap(),
        fs::read(dir.path().join("t/constants.json")).unwrap()
    );
    let curve = fs::read_to_string(dir.path().join("t/curve.csv")).unwrap();
    assert!(curve.starts_with("lambda,lambda2,loss,se\n"));
    assert_eq!(curve.lines().count(), 65);
}

#[test]
fn tune_on_noiseless_instance_reports_the_domain_edge() {
    let dir = tempfile::tempdir().unwrap();
    let gen = json!({
        "generator": {
            "input": {"family": "gaussian_entries", "sigma_x": 1.0, "d": 3},
            "prior": {"family": "point_mass", "mean": [1.0, -1.0, 0.5], "omega": 0.0},
            "noise": {"family": "gaussian", "sigma": 0.0}
        },
        "T": 5, "n": 10, "n_v": 4, "format": "json"
    });
    let cfg = write_config(dir.path(), "gen.json", &gen);
    assert!(regtune(&["gen", "--config", &cfg, "--out", "g"], dir.path()).status.success());
    let tune = json!({
        "instance": "g/instance.json",
        "search": {"kind": "log_grid", "lo": 0.001, "hi": 100.0, "points": 20, "refine": true}
    });
    let cfg = write_config(dir.path(), "tune.json", &tune);
    assert!(regtune(&["tune", "--config", &cfg, "--out", "t"], dir.path()).status.success());
    let r = read_json(&dir.path().join("t/tune.json"));
    let lam = r["lambda_erm"]["lambda"].as_f64().unwrap();
    assert!(lam <= 0.001 * 1.001, "{lam}");
}

#[test]
fn solve_inline_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (json!({"kind": "ridge", "lambda": 1.0}), 1.0),
        (json!({"kind": "elastic_net", "lambda1": 2.0, "lambda2": 1.0}), 0.5),
        (json!({"kind": "lasso", "lambda1": 1.0}), 1.5),
    ];
    for (i, (est, want)) in cases.iter().enumerate() {
        let cfg = json!({"estimator": est, "inline": {"x": [[1.0]], "y": [2.0]}});
        let path = write_config(dir.path(), &format!("s{i}.json"), &cfg);
        let out_dir = format!("s{i}");
        assert!(regtune(&["solve", "--config", &path, "--out", &out_dir], dir.path()).status.success());
        let r = read_json(&dir.path().join(&out_dir).join("solution.json"));
        assert!((r["w_hat"][0].as_f64().unwrap() - want).abs() < 1e-12, "{est}");
        assert!(r["kkt_residual"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn bounds_from_hand_filled_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "theorem": "ridge",
        "inputs": {
            "t": 100, "n": 10, "n_v": 10, "d": 3, "delta": 0.05,
            "l": 1.0, "c": 1.0, "m": 1.0, "b_v": 1.0, "lambda_dt": 1.0,
            "e_xv_norm": 1.0, "e_xv_norm_sq": 1.0, "e_y_over_sqrt_v": 1.0
        }
    });
    let path = write_config(dir.path(), "b.json", &cfg);
    assert!(regtune(&["bounds", "--config", &path, "--out", "b"], dir.path()).status.success());
    let r = read_json(&dir.path().join("b/bounds.json"));
    let terms: Vec<f64> = r["terms"].as_array().unwrap().iter().map(|t| t["value"].as_f64().unwrap()).collect();
    // 2MLΛE‖x‖/√T, 2L√E‖x‖²E[‖y‖/√V]/√(n_v T), 2MLb_vΛ√(ln(4T/δ)/2)/√(n_v T), 5C√(ln(16/δ)/(2T)).
    let want = [
        0.2,
        2.0 / 1000f64.sqrt(),
        2.0 * (8000f64.ln() / 2.0).sqrt() / 1000f64.sqrt(),
        5.0 * (320f64.ln() / 200.0).sqrt(),
    ];
    for (g, w) in terms.iter().zip(want) {
        assert!((g - w).abs() <= 1e-14, "{g} vs {w}");
    }
    let csv = fs::read_to_string(dir.path().join("b/bounds.csv")).unwrap();
    assert!(csv.starts_with("theorem,term,value\n"));
}

#[test]
fn bounds_missing_input_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"theorem": "lasso", "inputs": {"t": 10, "n": 5, "n_v": 2, "d": 2, "delta": 0.1}});
    let path = write_config(dir.path(), "b.json", &cfg);
    let out = regtune(&["bounds", "--config", &path], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('`'));
}

#[test]
fn experiment_with_injected_risk_recovers_the_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "kind": "sweep",
        "axis": "T",
        "grid": [25, 100, 400, 1600],
        "t": 25, "d": 3, "n": 18, "n_v": 5,
        "generator": {
            "input": {"family": "uniform_entries", "sigma_x": 1.0, "d": 3},
            "prior": {"family": "gaussian", "omega": 1.0},
            "noise": {"family": "gaussian", "sigma": 0.5}
        },
        "family": {"kind": "ridge"},
        "search": {"kind": "scaled_log_grid", "lo_factor": 1e-6, "hi_factor": 1e6, "points": 64, "refine": true},
        "loss": {"kind": "squared"},
        "replicates": 2,
        "seed": 1,
        "injected": {"scale": 2.0, "exponent": -0.5}
    });
    let path = write_config(dir.path(), "e.json", &cfg);
    let out = regtune(&["experiment", "--config", &path, "--out", "e"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("e/sweep_T.json"));
    assert!((r["fit"]["slope"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!(dir.path().join("e/sweep_T.svg").exists());
    let header = fs::read_to_string(dir.path().join("e/sweep_T.csv")).unwrap();
    assert!(header.starts_with("axis_value,T,d,n,n_v,mean,se,ci_lo,ci_hi,mean_lambda_erm,lambda_star,bound_total,"));
}
