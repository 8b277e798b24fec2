use std::fs;
use std::path::Path;
use std::process::Command;

fn mtrd(args: &[&str], dir: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mtrd"))
        .args(args)
        .current_dir(dir)
        .env("MTRD_THREADS", "1")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into(), String::from_utf8_lossy(&out.stderr).into())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn region_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.json", r#"{"source": {"dsbs": 0.1}, "d": [0.05, 0.05], "weights": 3, "budget": 5}"#);
    let (code, out, err) = mtrd(&["region", "--config", &cfg, "--out", "o", "--seed", "4", "--set", "in", "--set", "out1"], dir.path());
    assert_eq!(code, 0, "{out}{err}");
    let csv = fs::read_to_string(dir.path().join("o/region_in.csv")).unwrap();
    assert!(csv.starts_with("set_id,theta,w1,w2,R1,R2,Ed1,Ed2,vertex,on_frontier\n"));
    assert!(!dir.path().join("o/region_out3.csv").exists());
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 4);
    assert!(meta["wall_clock"]["elapsed_seconds"].is_number());
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"source": {"dsbs": 0.1}, "d": [-0.1, 0]}"#);
    let (code, _, err) = mtrd(&["region", "--config", &bad], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("`d`"), "{err}");
    let (code, _, _) = mtrd(&["region", "--config", "missing.json"], dir.path());
    assert_eq!(code, 1);
    let tensor = write(dir.path(), "t.json", r#"{"triple": {"axes": ["X", "Y", "Z"], "sizes": [2, 2, 2], "values": [1]}}"#);
    assert_eq!(mtrd(&["dpi", "--config", &tensor], dir.path()).0, 1);
}

#[test]
fn verdict_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let chain = write(
        dir.path(),
        "chain.json",
        r#"{"triple": {"axes": ["X", "Y", "Z"], "sizes": [2, 2, 2],
            "values": [0.36, 0.09, 0.01, 0.04, 0.04, 0.01, 0.09, 0.36]}}"#,
    );
    assert_eq!(mtrd(&["dpi", "--config", &chain], dir.path()).0, 0);
    let common = write(dir.path(), "c.json", r#"{"triple": {"axes": ["X", "Y", "Z"], "sizes": [2, 1, 2], "values": [0.5, 0, 0, 0.5]}}"#);
    assert_eq!(mtrd(&["dpi", "--config", &common], dir.path()).0, 3);

    let ch = write(
        dir.path(),
        "ch.json",
        r#"{"source": {"dsbs": 0.1}, "channel": {"common_info": {"f1": [0, 1], "f2": [0, 1], "s_size": 2}}}"#,
    );
    assert_eq!(mtrd(&["feasible", "--config", &ch, "--set", "out1"], dir.path()).0, 0);
    assert_eq!(mtrd(&["feasible", "--config", &ch, "--set", "out3"], dir.path()).0, 3);

    let v = write(dir.path(), "v.json", r#"{"source": {"dsbs": 0.1}, "validate": {"n": [1, 2], "trials": 25}}"#);
    assert_eq!(mtrd(&["validate", "--config", &v], dir.path()).0, 0);
    assert_eq!(mtrd(&["validate", "--config", &v, "--self-test", "--out", "val"], dir.path()).0, 3);
    assert!(dir.path().join("val/validation.json").exists());
    assert!(fs::read_dir(dir.path().join("val/validation-failures")).unwrap().count() > 0);
}
