use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dlag(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dlag"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DLAG_OUT_DIR")
        .output()
        .expect("dlag runs")
}

fn manifest(out: &Path) -> Value {
    let text = fs::read_to_string(out.join("manifest.json")).expect("manifest exists");
    serde_json::from_str(&text).expect("manifest is valid JSON")
}

fn checks(m: &Value) -> Vec<(String, String)> {
    m["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["name"].as_str().unwrap().to_string(), c["status"].as_str().unwrap().to_string()))
        .collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap_or("").to_string()).collect()
}

#[test]
fn fixture_recurrence_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(&["compute", "--alpha", "0", "--lambda", "1", "--t", "2", "--n-max", "4", "--task", "recurrence"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("recurrence_t2.csv")).unwrap();
    let a0 = &column(&csv, "alpha_n")[0];
    assert!(a0.starts_with("1.33333333333333333333333333333333333333"), "{a0}");
    let b1 = &column(&csv, "beta_n")[1];
    assert!(b1.starts_with("1.55555555555555555555555555555555555555"), "{b1}");
    let m = manifest(dir.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["schema_version"], 1);
}

#[test]
fn laguerre_alpha_column_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(&["compute", "--alpha", "1.5", "--lambda", "0", "--t", "1", "--n-max", "6", "--format", "csv"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("recurrence_t1.csv")).unwrap();
    for (n, a) in column(&csv, "alpha_n").iter().take(6).enumerate() {
        let expect = 2.0 * n as f64 + 2.5;
        let v: f64 = a.parse().unwrap();
        assert_eq!(v, expect);
        let frac = a.split_once('.').map(|(_, f)| f).unwrap_or("");
        assert!(frac.chars().skip(1).all(|c| c == '0'), "{a}");
    }
    assert!(!dir.path().join("aux_t1.json").exists());
}

#[test]
fn rerun_gives_identical_hashes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["compute", "--alpha", "0.5", "--lambda", "1.5", "--t", "1", "--t", "3", "--n-max", "5", "--digits", "30"];
    assert!(dlag(&args, a.path()).status.success());
    assert!(dlag(&args, b.path()).status.success());
    let files = |p: &Path| -> BTreeMap<String, String> {
        manifest(p)["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
            .collect()
    };
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert_eq!(fa.len(), 12);
    assert_eq!(fa, fb);
}

#[test]
fn verify_passes_on_a_standard_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(&["verify", "--alpha", "0.5", "--lambda", "1", "--t", "1", "--t", "2", "--n-max", "5", "--digits", "40"], dir.path());
    let m = manifest(dir.path());
    assert!(o.status.success(), "{m}");
    let all = checks(&m);
    assert!(all.len() >= 36);
    assert!(all.iter().all(|(_, s)| s == "pass"));
    for name in ["s21", "d12", "tb1", "dphi", "dlnhnt", "painleve_v[n=4]", "sigma_form[n=1]", "ode[n=3]", "hn"] {
        assert!(all.iter().any(|(n, _)| n == name), "{name} missing");
    }
    assert!(dir.path().join("verify_t1.json").exists());
}

#[test]
fn corrupted_moment_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(
        &["verify", "--alpha", "0.5", "--lambda", "1", "--t", "1", "--n-max", "5", "--digits", "40", "--corrupt-moment", "3:1e-20"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "failed");
    let all = checks(&m);
    assert!(all.iter().any(|(n, s)| n == "s21" && s == "fail"));
    let worst = &m["summary"]["worst_failure"];
    assert!(worst["name"].is_string() && worst["n"].is_u64());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("failed:") && stderr.contains("at n="), "{stderr}");
}

#[test]
fn laguerre_verification_is_annotated() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(&["verify", "--alpha", "1", "--lambda", "0", "--t", "1", "--n-max", "4", "--digits", "30"], dir.path());
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify_t1.json")).unwrap()).unwrap();
    for r in v["identities"].as_array().unwrap() {
        let notes = r["notes"].as_array().unwrap();
        assert!(notes.iter().any(|n| n == "degenerate: classical Laguerre"), "{}", r["identity"]);
    }
}

#[test]
fn long_time_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(
        &["asymptotics", "--regime", "long-time", "--alpha", "0", "--lambda", "1", "--t", "100", "--t", "1000", "--t", "10000", "--n-max", "2", "--digits", "40"],
        dir.path(),
    );
    assert!(o.status.success());
    let m = manifest(dir.path());
    let beta = m["checks"].as_array().unwrap().iter().find(|c| c["name"] == "long_time:beta_n").unwrap();
    let slope = beta["detail"]["slope"].as_f64().unwrap();
    assert!((slope + 3.0).abs() <= 0.1, "{slope}");
    let csv = fs::read_to_string(dir.path().join("longtime_beta_n_n2.csv")).unwrap();
    assert!(csv.starts_with("scale,n,t,exact,series,abs_err,n(n+α)"));
}

#[test]
fn laguerre_large_n_is_an_exact_match() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(&["asymptotics", "--alpha", "1", "--lambda", "0", "--t", "1", "--n-max", "32", "--digits", "30"], dir.path());
    assert!(o.status.success());
    let m = manifest(dir.path());
    for c in m["checks"].as_array().unwrap() {
        assert_eq!(c["detail"]["status_label"], "exact match");
    }
}

#[test]
fn inconclusive_slopes_only_fail_when_strict() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["asymptotics", "--alpha", "0.5", "--lambda", "1", "--t", "1", "--n-max", "2", "--digits", "20"];
    let o = dlag(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(checks(&manifest(dir.path())).iter().all(|(_, s)| s == "inconclusive"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(dlag(&strict, dir.path()).status.code(), Some(4));
}

#[test]
fn module_error_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = dlag(&["compute", "--t", "1", "--n-max", "4", "--corrupt-moment", "2:-0.99"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let m = manifest(dir.path());
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("Hankel pivot"));
    assert!(dir.path().join("moments_t1.csv.partial").exists());
    assert!(!dir.path().join("moments_t1.csv").exists());
    assert!(m["files"].as_array().unwrap().iter().all(|f| f["path"].as_str().unwrap().ends_with(".partial")));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dlag(&["compute", "--n-max", "3"], dir.path()).status.code(), Some(2));
    assert_eq!(dlag(&["compute", "--t", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(dlag(&["compute", "--t", "1", "--format", "xml"], dir.path()).status.code(), Some(2));
    assert_eq!(dlag(&["asymptotics", "--regime", "sideways", "--t", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(dlag(&["frobnicate"], dir.path()).status.code(), Some(2));
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(dlag(&["compute", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn config_file_env_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let from_env = dir.path().join("env-out");
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "alpha = 0\nlambda = 1\nt = 2\nt = 4\nn_max = 3\ndigits = 25\nformat = csv\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dlag"))
        .args(["compute", "--config", cfg.to_str().unwrap(), "--t", "2"])
        .env("DLAG_OUT_DIR", &from_env)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&from_env);
    assert_eq!(m["config"]["t_grid"], serde_json::json!(["2"]));
    assert_eq!(m["config"]["digits"], 25);
    assert!(from_env.join("recurrence_t2.csv").exists());
    assert!(!from_env.join("recurrence_t2.json").exists());

    let flagged = dir.path().join("flag-out");
    let o = Command::new(env!("CARGO_BIN_EXE_dlag"))
        .args(["compute", "--config", cfg.to_str().unwrap(), "--out", flagged.to_str().unwrap()])
        .env("DLAG_OUT_DIR", &from_env)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flagged.join("recurrence_t4.csv").exists());
}
