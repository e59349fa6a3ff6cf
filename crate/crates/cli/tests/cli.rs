use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use seqmcm::qcore::{validate_povm, Ensemble, Povm};

fn seqmcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqmcm")).args(args).output().expect("binary runs")
}

fn seqmcm_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqmcm"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = seqmcm(args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column<'a>(header: &[String], rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].as_str()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn confidences(v: &Value) -> Vec<f64> {
    v["mcm"]["entries"].as_array().unwrap().iter().map(|e| e["C"].as_f64().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn trine_confidences_are_two_thirds() {
    let v = ok_json(&["mcm", "--family", "gu", "--params", r#"{"N":3}"#]);
    for c in confidences(&v) {
        assert!((c - 2.0 / 3.0).abs() < 1e-12, "{c}");
    }
    assert!(v["weights"]["eta0"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["kkt"]["passed"], true);
}

#[test]
fn two_state_confidence_matches_closed_form() {
    let v = ok_json(&["mcm", "--family", "two_mixed", "--params", r#"{"p":0.5,"theta":"90deg"}"#]);
    for c in confidences(&v) {
        assert!((c - 0.75).abs() < 1e-12, "{c}");
    }
}

#[test]
fn explicit_ensemble_with_one_live_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "e.json",
        r#"{"priors":[1.0,0.0],"states":[
            {"dim":2,"entries":[[1,0],[0,0],[0,0],[0,0]]},
            {"dim":2,"entries":[[0,0],[0,0],[0,0],[1,0]]}]}"#,
    );
    let v = ok_json(&["mcm", "--ensemble", &path]);
    let c = confidences(&v);
    assert!((c[0] - 1.0).abs() < 1e-12 && c[1].abs() < 1e-12, "{c:?}");
}

#[test]
fn emitted_ensemble_and_povm_revalidate() {
    let v = ok_json(&["mcm", "--family", "mirror", "--params", r#"{"theta":"100deg"}"#]);
    let e: Ensemble = serde_json::from_value(v["ensemble"].clone()).unwrap();
    assert_eq!(e.len(), 3);
    let p: Povm = serde_json::from_value(v["povm"].clone()).unwrap();
    assert!(validate_povm(&p).unwrap().passed);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"priors":[0.7,0.7],"states":[]}"#);
    for args in [
        vec!["mcm", "--ensemble", bad.as_str()],
        vec!["mcm", "--family", "nope"],
        vec!["mcm", "--family", "gu", "--params", "{"],
        vec!["mcm", "--family", "mirror", "--params", r#"{"theta":"wide"}"#],
        vec!["mcm"],
        vec!["sequence", "--family", "gu", "--params", r#"{"N":3}"#, "--parties", "2"],
        vec!["sequence", "--family", "gu", "--params", r#"{"N":3}"#, "--parties", "3", "--eta0", "0.1,0.2"],
        vec!["sequence", "--family", "gu", "--params", r#"{"N":3}"#, "--eta0", "0.5", "--retarget", "numeric"],
        vec!["sweep", "--family", "gu", "--params", r#"{"N":3}"#, "--vary", "N"],
        vec!["frobnicate"],
    ] {
        let out = seqmcm(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn failed_optimality_check_exits_3() {
    let out = seqmcm(&["mcm", "--family", "gu", "--params", r#"{"N":3}"#, "--tol=-1"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn infeasible_party_exits_4_and_is_named() {
    let args = ["sequence", "--family", "lifted_gu", "--params", r#"{"N":3,"theta":"60deg"}"#, "--parties", "2"];
    let out = seqmcm(&[&args[..], &["--eta0", "0.2"]].concat());
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("party 1"), "{}", stderr(&out));
    let out = seqmcm(&[&args[..], &["--eta0", "0.9,0.2"]].concat());
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("party 2"), "{}", stderr(&out));
}

#[test]
fn gu_sequence_csv_follows_the_contraction() {
    let out = seqmcm(&["sequence", "--family", "gu", "--params", r#"{"N":3}"#, "--parties", "10", "--eta0", "0.5", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    assert_eq!(rows.len(), 10);
    for (j, c) in column(&h, &rows, "C_1").iter().enumerate() {
        let expected = 2.0 / 3.0 * 0.5 * (1.0 + 0.75f64.powi(j as i32));
        assert!((num(c) - expected).abs() < 1e-9, "j = {}: {c} vs {expected}", j + 1);
    }
}

#[test]
fn two_state_optimal_schedule_final_row() {
    let out = seqmcm(&[
        "sequence", "--family", "two_mixed", "--params", r#"{"p":1,"theta":"60deg"}"#, "--parties", "2", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    let pj = num(column(&h, &rows, "P_J")[1]);
    let pi = num(column(&h, &rows, "P_I")[1]);
    let expected = (1.0 - 0.5f64.sqrt()).powi(2);
    assert!((pj - expected).abs() < 1e-9, "{pj}");
    assert!((pj - 0.08579).abs() < 1e-5);
    assert!((pi - 0.5).abs() < 1e-9, "{pi}");
}

#[test]
fn explicit_gains_and_targets() {
    let out = seqmcm(&[
        "sequence", "--family", "two_mixed", "--params", r#"{"p":0.8,"theta":"60deg"}"#, "--parties", "2",
        "--retarget", "explicit", "--gains", "0.1,0.1", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    for g in column(&h, &rows, "G") {
        assert!((num(g) - 0.1).abs() < 1e-9, "{g}");
    }
    let dir = tempfile::tempdir().unwrap();
    let one = r#"{"dim":2,"amplitudes":[[1,0],[0,0]]}"#;
    let targets = write(dir.path(), "t.json", &format!("[{one},{one},{one}]"));
    let out = seqmcm(&[
        "sequence", "--family", "gu", "--params", r#"{"N":3}"#, "--eta0", "0.5", "--retarget", "explicit", "--targets", &targets,
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let after: Ensemble = serde_json::from_value(v["final_ensemble"].clone()).unwrap();
    assert!(after.state(0).bloch().unwrap()[2] > 0.0);
}

#[test]
fn mirror_chain_loses_confidence_and_purity() {
    let out = seqmcm(&[
        "sequence", "--family", "mirror", "--params", r#"{"theta":"100deg"}"#, "--parties", "9", "--eta0", "0.9", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    assert_eq!(rows.len(), 9);
    for name in ["C_1", "C_2", "purity_1", "purity_2"] {
        let v: Vec<f64> = column(&h, &rows, name).into_iter().map(num).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{name}: {v:?}");
    }
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = seqmcm(&[
            "sequence", "--family", "lifted_gu", "--params", r#"{"N":4,"theta":1.0}"#, "--parties", "4", "--eta0", "0.8",
            "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["trace.json", "trace.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
    let trace: Value = serde_json::from_slice(&std::fs::read(a.path().join("trace.json")).unwrap()).unwrap();
    let e: Ensemble = serde_json::from_value(trace["final_ensemble"].clone()).unwrap();
    assert_eq!(e.len(), 4);
}

#[test]
fn degrees_and_radians_agree() {
    let deg = ok_json(&["mcm", "--family", "mirror", "--params", r#"{"theta":"120deg"}"#]);
    let rad = ok_json(&["mcm", "--family", "mirror", "--params", &format!(r#"{{"theta":{}}}"#, 2.0 * PI / 3.0)]);
    for (a, b) in confidences(&deg).iter().zip(confidences(&rad)) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn gu_sweep_matches_oracle() {
    let args = ["sweep", "--family", "gu", "--params", r#"{"N":3}"#, "--eta0", "0.1,0.5,0.9", "--parties", "10"];
    let out = seqmcm(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    assert_eq!(rows.len(), 30);
    for name in ["confidence_residual", "state_residual"] {
        for r in column(&h, &rows, name) {
            assert!(num(r) < 1e-9, "{name} {r}");
        }
    }
    let serial = seqmcm_env(&args, "SEQMCM_THREADS", "1");
    assert_eq!(serial.stdout, out.stdout);
    let bad = seqmcm_env(&args, "SEQMCM_THREADS", "many");
    assert_eq!(code(&bad), 2);
}

#[test]
fn mirror_trend_flips_at_two_pi_over_three() {
    let out = seqmcm(&["sweep", "--family", "mirror", "--vary", "theta=96deg:144deg:9", "--eta0", "0.5", "--parties", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    let thetas = column(&h, &rows, "theta");
    let trends = column(&h, &rows, "trend");
    for (t, s) in thetas.iter().zip(&trends) {
        let gap = num(t) - 2.0 * PI / 3.0;
        let expected = if gap.abs() < 1e-9 { "0" } else if gap < 0.0 { "-1" } else { "1" };
        assert_eq!(*s, expected, "theta {t}");
    }
    assert!(trends.contains(&"0"));
}

#[test]
fn lifted_threshold_flips_at_seven_parties() {
    let out = seqmcm(&[
        "sweep", "--family", "lifted_gu", "--params", r#"{"N":3,"theta":"90deg"}"#, "--eta0", "0.5", "--parties", "8",
        "--threshold", "0.4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    let clear = column(&h, &rows, "all_clear");
    assert_eq!(clear, [vec!["true"; 6], vec!["false"; 2]].concat());
    let bound = ok_json(&[
        "family", "--family", "lifted_gu", "--params", r#"{"N":3,"theta":"90deg"}"#, "--eta0", "0.5", "--parties", "8",
        "--threshold", "0.4",
    ]);
    assert_eq!(bound["party_bound"]["max_parties"], 6);
}

#[test]
fn sweep_records_point_failures_and_continues() {
    let out = seqmcm(&[
        "sweep", "--family", "lifted_gu", "--params", r#"{"N":3}"#, "--vary", "theta=30deg,60deg", "--eta0", "0.6", "--parties", "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (h, rows) = table(&stdout(&out));
    let errors = column(&h, &rows, "error");
    assert_eq!(rows.len(), 3);
    assert!(errors[0].contains("party 1"), "{errors:?}");
    assert!(errors[1].is_empty() && errors[2].is_empty());
}

#[test]
fn family_prints_closed_forms() {
    let v = ok_json(&["family", "--family", "gu", "--params", r#"{"N":5}"#]);
    assert!((v["oracle"]["confidence"].as_f64().unwrap() - 0.4).abs() < 1e-15);
    let out = seqmcm(&["family", "--family", "two_mixed", "--params", r#"{"p":1,"theta":"60deg"}"#, "--parties", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["optimal_joint_success"].as_f64().unwrap() - 0.0857864376269049).abs() < 1e-12);
}

#[test]
fn verify_suites_pass() {
    for suite in ["duality", "proposition", "monotonicity", "families"] {
        let out = seqmcm(&["verify", suite, "--seed", "11", "--count", "100"]);
        assert_eq!(code(&out), 0, "{suite}: {}", stderr(&out));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["passed"], true);
        for c in v["checks"].as_array().unwrap() {
            assert_eq!(c["failures"], 0, "{c}");
        }
    }
    let v = ok_json(&["verify", "monotonicity", "--count", "500"]);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["instances"] == 500));
}
