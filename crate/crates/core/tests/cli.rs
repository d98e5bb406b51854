use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str], workers: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-fg"))
        .args(args)
        .current_dir(dir)
        .env("PADIC_FG_WORKERS", workers)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cex_build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cex", "build", "--p", "3", "--stages", "6", "--out", "o"], "1");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&dir.path().join("o/cex.json"));
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["result"]["state"]["n"].as_array().unwrap().len(), 6);
    assert_eq!(doc["result"]["subtorus"]["verdict"], "not_special");
    let csv = std::fs::read_to_string(dir.path().join("o/cex_residuals.csv")).unwrap();
    assert!(csv.starts_with("j,n,m,residual,paths_agree\n"));
    assert_eq!(csv.lines().count(), 7);

    let out = run(dir.path(), &["cex", "verify", "--state", "o/cex.json", "--prec", "60"], "1");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn tampered_state_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["cex", "build", "--p", "5", "--stages", "3", "--out", "o"], "1");
    assert_eq!(out.status.code(), Some(0));
    let mut doc = json(&dir.path().join("o/cex.json"));
    let phi0 = &mut doc["result"]["state"]["phi"][0]["unit"];
    let bumped = phi0.as_str().unwrap().parse::<num_bigint::BigInt>().unwrap() + num_bigint::BigInt::from(5).pow(12);
    *phi0 = Value::String(bumped.to_string());
    std::fs::write(dir.path().join("bad.json"), serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(dir.path(), &["cex", "verify", "--state", "bad.json", "--prec", "60"], "1");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn subtorus_and_newton() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["subtorus", "check", "--curve", "diagonal", "--expect", "special"], "1");
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["lambda"][0]["unit"], "1");
    assert_eq!(doc["result"]["lambda"][0]["v"], 0);

    let out = run(dir.path(), &["subtorus", "check", "--curve", "double", "--expect", "not_special"], "1");
    assert_eq!(out.status.code(), Some(1));

    let out = run(dir.path(), &["newton", "polygon", "--p", "3", "--alpha-val", "1"], "1");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"1/3\""), "{text}");
    let out = run(dir.path(), &["newton", "polygon", "--p", "3", "--alpha-val", "6"], "1");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["cex", "build", "--p", "4"][..],
        &["cex", "build", "--p", "2"],
        &["subtorus", "check", "--curve", "nope"],
        &["no-such-command"],
        &["cex", "verify", "--state", "missing.json"],
    ] {
        let out = run(dir.path(), args, "1");
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"p": 5, "stages": 2, "prec": 40}"#).unwrap();
    let out = run(dir.path(), &["--config", "c.json", "cex", "build", "--stages", "3", "--out", "o"], "1");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let header = &json(&dir.path().join("o/cex.json"))["header"]["config"];
    assert_eq!(header["p"], 5);
    assert_eq!(header["stages"], 3);
    assert_eq!(header["prec"], 40);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cmds: &[&[&str]] = &[
        &["scan", "dichotomy", "--curve", "shifted", "--levels", "2"],
        &["weights", "classify", "--curve", "diagonal", "--k-max", "10", "--levels", "1"],
        &["orbit", "forward", "--curve", "double", "--k", "20"],
    ];
    for cmd in cmds {
        let outs: Vec<Vec<u8>> = ["1", "8"]
            .iter()
            .map(|w| {
                let o = run(dir.path(), cmd, w);
                assert_eq!(o.status.code(), Some(0), "{cmd:?}: {}", String::from_utf8_lossy(&o.stderr));
                o.stdout
            })
            .collect();
        assert_eq!(outs[0], outs[1], "{cmd:?}");
    }
}
