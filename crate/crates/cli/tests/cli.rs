use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sqg_core::solver::checkpoint;

fn sqg(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sqg"));
    cmd.args(args).env_remove("SQG_MAX_GRID");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_in(dir: &Path, sub: &str, config: &Path, out: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join(out);
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (sqg(&args, &[]), out)
}

fn error_line(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

const SHEAR: &str = r#"{
  "schema": "sqg.run.v1",
  "datum": {"kind": "single_mode"},
  "solver": {"nu": 0.1, "grid_n": 32, "dt": 0.001, "t_end": 2.0, "record_every": 10}
}"#;

#[test]
fn run_reproduces_the_decaying_shear() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SHEAR);
    let (o, out) = run_in(dir.path(), "run", &cfg, "a", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,hamiltonian,l2_sq,lp_4_3,lp_2,lp_3,dissipation_to_t,weighted_h_half_to_t,tail_c0_5,tail_c1,tail_c2"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 201);
    let last: Vec<f64> = rows[200].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[0] - 2.0).abs() < 1e-12);
    assert!((last[1] - (-0.4f64).exp() / 2.0).abs() < 1e-6);

    let (state, t) = checkpoint::load(&out.join("final.sqgf")).unwrap();
    assert!((t - 2.0).abs() < 1e-12);
    assert!((state.coeff(1, 0).im + (-0.2f64).exp() / 2.0).abs() < 1e-10);

    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "completed");
    assert_eq!(m["command"], "run");
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["solver"]["nu"], 0.1);

    // same config, different key order and output directory: identical bytes
    let reordered = r#"{"solver": {"record_every": 10, "t_end": 2.0, "dt": 0.001, "grid_n": 32, "nu": 0.1},
        "datum": {"kind": "single_mode"}, "schema": "sqg.run.v1"}"#;
    let cfg2 = write(dir.path(), "run2.json", reordered);
    let (o, out2) = run_in(dir.path(), "run", &cfg2, "b", &[]);
    assert!(o.status.success());
    for f in ["diagnostics.csv", "final.sqgf"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(out2.join(f)).unwrap(), "{f}");
    }
    let m2: Value = serde_json::from_str(&fs::read_to_string(out2.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config_hash"], m2["config_hash"]);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in [
        "{",
        r#"{"schema": "sqg.run.v1", "datum": {"kind": "single_mode"}}"#,
        r#"{"schema": "sqg.run.v1", "typo": 1, "datum": {"kind": "single_mode"}, "solver": {"nu": 0.1, "grid_n": 32, "dt": 0.001, "t_end": 1.0}}"#,
        r#"{"schema": "sqg.run.v2", "datum": {"kind": "single_mode"}, "solver": {"nu": 0.1, "grid_n": 32, "dt": 0.001, "t_end": 1.0}}"#,
        r#"{"schema": "sqg.run.v1", "datum": {"kind": "single_mode"}, "solver": {"nu": -1, "grid_n": 32, "dt": 0.001, "t_end": 1.0}}"#,
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = write(dir.path(), &format!("bad{i}.json"), text);
        let (o, out) = run_in(dir.path(), "run", &cfg, &format!("out{i}"), &[]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert_eq!(error_line(&o)["error"]["category"], "config_error");
        assert!(!out.exists(), "{text}");
    }
}

#[test]
fn cfl_violation_is_reported_before_stepping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfl.json",
        r#"{"schema": "sqg.run.v1", "datum": {"kind": "single_mode"},
            "solver": {"nu": 0.1, "grid_n": 32, "dt": 0.5, "t_end": 1.0}}"#,
    );
    let (o, out) = run_in(dir.path(), "run", &cfg, "out", &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_line(&o)["error"]["category"], "cfl_violation");
    assert!(!out.join("diagnostics.csv").exists());
    assert!(!out.join("final.sqgf").exists());
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "failed");
    assert_eq!(m["error"]["category"], "cfl_violation");
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "rand.json",
        r#"{"schema": "sqg.run.v1", "datum": {"kind": "random_band", "seed": 1, "band": 4},
            "solver": {"nu": 0.1, "grid_n": 32, "dt": 0.01, "t_end": 0.1}}"#,
    );
    let (a, out_a) = run_in(dir.path(), "run", &cfg, "a", &[]);
    let (b, out_b) = run_in(dir.path(), "run", &cfg, "b", &["--seed", "2"]);
    let (c, out_c) = run_in(dir.path(), "run", &cfg, "c", &["--seed", "2", "--jobs", "1"]);
    assert!(a.status.success() && b.status.success() && c.status.success());
    let read = |p: &Path| fs::read(p.join("final.sqgf")).unwrap();
    assert_ne!(read(&out_a), read(&out_b));
    assert_eq!(read(&out_b), read(&out_c));
    let m: Value = serde_json::from_str(&fs::read_to_string(out_b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["datum"]["seed"], 2);
}

const SWEEP: &str = r#"{
  "schema": "sqg.sweep.v1",
  "nus": [0.4, 0.2, 0.1, 0.05],
  "datum": {"kind": "single_mode"},
  "coupling": "fixed",
  "solver": {"nu": 0.0, "grid_n": 16, "dt": 0.01, "t_end": 1.0, "nonlinearity": "off"},
  "t_end": 1.0,
  "c_list": [0.5],
  "records": 50
}"#;

#[test]
fn sweep_outputs_and_grid_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.json", SWEEP);
    let (o, out) = run_in(dir.path(), "sweep", &cfg, "s", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "nu,grid_n,D,tail_c0_5,H0,HT");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!((r[2] - (1.0 - (-2.0 * r[0]).exp()) / 2.0).abs() < 1e-5);
    }
    assert_eq!(
        rows.iter().map(|r| r[1] as usize).collect::<Vec<_>>(),
        vec![16, 32, 64, 128]
    );
    let small = fs::read_to_string(out.join("smalltime.csv")).unwrap();
    assert_eq!(small.lines().next().unwrap(), "delta,profile");
    let json: Value = serde_json::from_str(&fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(json["no_ad_verdict"], true);
    assert!(json["rate_fit"]["slope"].as_f64().unwrap() > 0.8);

    let out2 = dir.path().join("capped");
    let o = sqg(
        &["sweep", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()],
        &[("SQG_MAX_GRID", "64")],
    );
    assert_eq!(o.status.code(), Some(2));
    let e = error_line(&o);
    assert_eq!(e["error"]["category"], "config_error");
    assert!(e["error"]["message"].as_str().unwrap().contains("nu = 0.05"), "{e}");
    assert!(!out2.exists());
}

#[test]
fn rates_table_for_the_scaling_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "rates.json",
        r#"{"schema": "sqg.rates.v1", "ps": [1.6], "nus": [0.2, 0.1, 0.05, 0.025]}"#,
    );
    let (o, out) = run_in(dir.path(), "rates", &cfg, "r", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("rates.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "p,nu,grid_n,D,predicted_slope,fitted_slope,intercept,residual");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!((rows[0][4] - 0.5).abs() < 1e-12);
    assert!((rows[0][5] - 0.5).abs() < 0.025, "{}", rows[0][5]);
    let table: Value = serde_json::from_str(&fs::read_to_string(out.join("rates.json")).unwrap()).unwrap();
    assert_eq!(table[0]["p"], 1.6);

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"schema": "sqg.rates.v1", "ps": [1.0], "nus": [0.2, 0.1, 0.05, 0.025]}"#,
    );
    let (o, _) = run_in(dir.path(), "rates", &bad, "bad", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_passes_on_a_fresh_checkout() {
    let o = sqg(&["validate"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    for suite in ["parseval", "commutator", "positivity", "balance", "tail_bound"] {
        let line = text.lines().find(|l| l.starts_with(suite)).unwrap();
        assert!(line.ends_with("PASS"), "{line}");
    }
}
