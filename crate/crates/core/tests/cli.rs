use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn acd(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_acd"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("ACD_THREADS", t),
        None => cmd.env_remove("ACD_THREADS"),
    };
    cmd.output().unwrap()
}

fn run_to(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    acd(&args, None)
}

#[test]
fn sample_scenarios_pass() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, file) in [
        ("phase", "ab_fluxon.json"),
        ("phase", "ac_line.json"),
        ("duality", "duality.json"),
        ("force", "force_line.json"),
        ("entangle", "entangle_pi.json"),
        ("sweep", "sweep_length.json"),
        ("sweep", "sweep_winding.json"),
        ("sweep", "sweep_tilt.json"),
        ("suite", "suite.json"),
    ] {
        let out = dir.path().join(file);
        let o = run_to(sub, &scenario(file), &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{file}: {}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(report["schema"], "acd-report/1");
        assert_eq!(report["passed"], true, "{file}");
    }
}

#[test]
fn expectation_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(scenario("ac_line.json")).unwrap()).unwrap();
    cfg["expect"][0]["value"] = serde_json::json!(12.0);
    let path = dir.path().join("wrong.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let out = dir.path().join("r.json");
    let o = run_to("phase", &path, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["expectations"][0]["passed"], false);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let bad = dir.path().join("bad.json");

    fs::write(&bad, r#"{"schema": "acd-scenario/2", "id": "x", "kind": "phase"}"#).unwrap();
    let o = run_to("phase", &bad, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`schema`"));

    fs::write(&bad, r#"{"schema": "acd-scenario/1", "id": "x", "kind": "phase", "source": {"type": "fluxon2d", "flux": 1}}"#)
        .unwrap();
    let o = run_to("phase", &bad, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`path`"));

    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run_to("phase", &bad, &out, &[]).status.code(), Some(2));

    // kind mismatch between file and subcommand
    assert_eq!(run_to("force", &scenario("ac_line.json"), &out, &[]).status.code(), Some(2));
    assert_eq!(run_to("phase", &scenario("ac_line.json"), &out, &["--tol", "-1"]).status.code(), Some(2));
    assert_eq!(run_to("phase", &dir.path().join("missing.json"), &out, &[]).status.code(), Some(2));
    assert_eq!(acd(&["suite"], Some("many")).status.code(), Some(2));
    assert_eq!(acd(&["phase"], None).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(scenario("ac_line.json")).unwrap()).unwrap();
    cfg["tolerances"] = serde_json::json!({"tol": 1e-14, "max_segments": 64});
    let path = dir.path().join("nc.json");
    fs::write(&path, cfg.to_string()).unwrap();
    let o = run_to("phase", &path, &dir.path().join("r.json"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ac-line"));
}

#[test]
fn sweep_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("len.json");
    let o = run_to("sweep", &scenario("sweep_length.json"), &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("len.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "line_length");
    assert_eq!(*header.last().unwrap(), "status");
    let col = header.iter().position(|h| *h == "force_norm").unwrap();
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values[0] > values[1] && values[1] > values[2]);

    let explicit = dir.path().join("explicit.csv");
    let o = run_to("sweep", &scenario("sweep_length.json"), &out, &["--csv", explicit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(explicit).unwrap(), csv);
}

#[test]
fn tol_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run_to("phase", &scenario("ac_line.json"), &out, &["--tol", "1e-4"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["inputs"]["tolerances"]["tol"], 1e-4);
}

#[test]
fn suite_prints_table_and_json() {
    let o = acd(&["suite"], None);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 8);
    let table = String::from_utf8_lossy(&o.stderr);
    assert_eq!(table.lines().filter(|l| l.starts_with("PASS")).count(), 8);
}

#[test]
fn output_independent_of_thread_count() {
    let one = acd(&["suite"], Some("1"));
    let four = acd(&["suite"], Some("4"));
    let auto = acd(&["suite"], Some("0"));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);

    let cfg = scenario("sweep_tilt.json");
    let args = ["sweep", "--config", cfg.to_str().unwrap()];
    assert_eq!(acd(&args, Some("1")).stdout, acd(&args, Some("3")).stdout);
}
