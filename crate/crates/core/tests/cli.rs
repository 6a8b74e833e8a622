use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn distcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distcomp")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"command":"simulate","n":4,"seed":11,"transcripts":20}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(distcomp(&["--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(distcomp(&["--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "1"]).status.success());
    let (ca, cb) = (csvs(&a), csvs(&b));
    assert!(!ca.is_empty());
    assert_eq!(ca, cb);
    let head = String::from_utf8(ca[0].1.clone()).unwrap();
    assert!(head.starts_with("# distcomp "));
    assert!(head.lines().nth(1).unwrap().starts_with("# config "));
}

#[test]
fn flags_override_config() {
    let out = distcomp(&["typical", "--preset", "bsc:0.1", "--n", "8", "--delta", "3"]);
    assert!(out.status.success());
    assert!(!String::from_utf8_lossy(&out.stdout).contains("[fail]"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_json = write(tmp.path(), "bad.json", "{ not json");
    let unknown = write(tmp.path(), "unknown.json", r#"{"no_such_field":1}"#);
    let cases: [(&[&str], i32, &str); 5] = [
        (&["--config", &bad_json], 2, "error parse"),
        (&["--config", &unknown], 2, "error parse"),
        (&["info", "--preset", "nope:1"], 2, "error invalid-input"),
        (&["simulate", "--n", "6", "--cap-override", "max_code_words=10"], 3, "error cap-exceeded"),
        (&["simulate", "--n", "1", "--delta", "0.1"], 4, "error infeasible"),
    ];
    for (args, code, prefix) in cases {
        let out = distcomp(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with(prefix), "{args:?}: {err}");
        assert_eq!(err.trim_end().lines().count(), 1);
    }
}

#[test]
fn retries_exhausted_exit_code() {
    // with no retries, seed 0 draws at least one covering family that fails verification
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"max_retries":0}"#);
    let out = distcomp(&["simulate", "--n", "5", "--epsilon", "0.05", "--seed", "0", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error retries-exhausted"));
}
