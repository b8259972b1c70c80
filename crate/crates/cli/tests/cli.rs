use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tensormp"))
}

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    serde_json::from_str(&stdout).unwrap()
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn mp_solve_spot_value_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["mp-solve", "--config"])
        .arg(config_dir().join("mp_solve_unit.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let s = summary(&out);
    let (fr, fi) = complex(&s["f_at_i"]);
    let (cr, ci) = complex(&s["closed_form_at_i"]);
    assert!((fr - cr).abs() < 1e-12 && (fi - ci).abs() < 1e-12);
    assert!((fr - 0.3002).abs() < 1e-4 && (fi - 0.6248).abs() < 1e-4);
    assert!(s["closed_form_max_deviation"].as_f64().unwrap() < 1e-10);
    let csv = std::fs::read_to_string(dir.path().join("stieltjes.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "re_z,im_z,re_f,im_f,re_fprime,im_fprime");
    assert_eq!(csv.lines().count(), 1 + s["points"].as_u64().unwrap() as usize);
    let density = std::fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert_eq!(density.lines().next().unwrap(), "lambda,density");
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("density.json")).unwrap()).unwrap();
    assert!(sidecar["atom_at_zero"].is_number());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["experiment"], "mp-solve");
}

#[test]
fn misspelled_model_kind_exits_two_and_lists_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"experiment": "clt", "replicates": 10, "phis": [],
            "ensemble": {"n": 4, "c": 0.5, "model": {"kind": "speher"}, "taus": {"kind": "constant", "value": 1}}}"#,
    );
    let out = bin().arg("clt").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for kind in ["iid", "sphere", "lp"] {
        assert!(err.contains(kind), "{err}");
    }
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().arg("esd").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));

    let cfg = write(dir.path(), "missing.json", r#"{"experiment": "esd", "replicates": 3}"#);
    let out = bin().arg("esd").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ensemble"));

    let out = bin()
        .arg("clt")
        .arg("--config")
        .arg(config_dir().join("esd_gaussian.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let cfg = write(
        dir.path(),
        "k1.json",
        r#"{"experiment": "clt", "replicates": 10, "phis": [{"kind": "constant", "value": 1}],
            "ensemble": {"n": 4, "k": 1, "m": 2, "model": {"kind": "sphere"}, "taus": {"kind": "constant", "value": 1}}}"#,
    );
    let out = bin().arg("clt").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn moments_report_the_degeneracy_constant() {
    for (model, expected) in [("gaussian", 2.0), ("rademacher", 0.0), ("sphere", 0.0)] {
        let dir = tempfile::tempdir().unwrap();
        let out = bin()
            .args(["moments", "--model", model, "--n", "64", "--reps", "20000", "--out"])
            .arg(dir.path())
            .output()
            .unwrap();
        let s = summary(&out);
        let abc = &s["a_plus_b_plus_2"];
        assert!((abc["empirical"].as_f64().unwrap() - expected).abs() < 0.3, "{model}: {abc}");
        assert!((abc["analytic"].as_f64().unwrap() - expected).abs() < 1e-12);
        assert!(String::from_utf8_lossy(&out.stderr).contains("a+b+2"));
    }
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["moments", "--model", "lp:1.5", "--n", "16", "--reps", "10000", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let s = summary(&out);
    assert!(s["analytic"].is_null());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n/a"));
}

fn small_esd(dir: &Path) -> PathBuf {
    write(
        dir,
        "esd.json",
        r#"{"experiment": "esd", "replicates": 6,
            "ensemble": {"n": 6, "c": 0.5, "model": {"kind": "iid", "law": "gaussian"},
                         "taus": {"kind": "constant", "value": 1}, "master_seed": 5}}"#,
    )
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_esd(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = bin().arg("esd").arg("--config").arg(&cfg).arg("--out").arg(out).args(["--threads", threads]).output().unwrap();
        summary(&o);
    }
    for file in ["records.jsonl", "summary.json", "histogram.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let c = dir.path().join("c");
    let o = bin()
        .arg("esd")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&c)
        .env("TENSORMP_THREADS", "2")
        .args(["--seed", "6"])
        .output()
        .unwrap();
    summary(&o);
    assert_ne!(std::fs::read(a.join("records.jsonl")).unwrap(), std::fs::read(c.join("records.jsonl")).unwrap());
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["effective_config"]["ensemble"]["master_seed"], 6);
}

#[test]
fn clt_summary_reports_variance_and_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("clt")
        .arg("--config")
        .arg(config_dir().join("clt_bump_sphere.json"))
        .args(["--replicates", "30", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let s = summary(&out);
    assert!(s["statistics"][0]["variance"].as_f64().unwrap() >= 0.0);
    assert_eq!(s["predictions"][0]["V"].as_f64().unwrap(), 0.0);
    assert_eq!(s["warnings"].as_array().unwrap().len(), 1);
    let records = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 30);
}

#[test]
fn bilinear_and_cov_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("bilinear")
        .arg("--config")
        .arg(config_dir().join("bilinear_identity.json"))
        .args(["--replicates", "4000", "--out"])
        .arg(dir.path().join("bl"))
        .output()
        .unwrap();
    let s = summary(&out);
    assert_eq!(s["rhs"].as_f64().unwrap(), 4.0);
    assert!(s["relative_error"].as_f64().unwrap() < 0.2);

    let out = bin()
        .arg("cov")
        .arg("--config")
        .arg(config_dir().join("cov_unit.json"))
        .args(["--replicates", "20", "--out"])
        .arg(dir.path().join("cov"))
        .output()
        .unwrap();
    let s = summary(&out);
    assert_eq!(s["estimates"].as_array().unwrap().len(), 4);
    assert_eq!(s["predictions"].as_array().unwrap().len(), 4);
    assert_eq!(s["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn predict_variance_writes_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("predict-variance")
        .arg("--config")
        .arg(config_dir().join("predict_bump.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    let s = summary(&out);
    let v = &s["variances"][0];
    assert_eq!(v["V_eta"].as_array().unwrap().len(), 3);
    assert!(v["V"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("predictions.json").exists());
}
