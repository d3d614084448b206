use std::path::Path;
use std::process::{Command, Output};

fn nlslab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("NLSLAB_OUT")
        .output()
        .unwrap()
}

fn files(dir: &Path, ext: &str) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--seed",
        "9",
        "--set",
        "simulate.cutoff=8",
        "--set",
        "simulate.t_end=0.05",
        "--set",
        "simulate.initial=sparse",
    ];
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, threads) in [(&a, "1"), (&b, "4")] {
        let o = nlslab(&[&args[..], &["--threads", threads]].concat(), dir);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = files(&a, "csv");
    assert!(!csv.is_empty());
    assert_eq!(csv, files(&b, "csv"));
    assert_eq!(files(&a, "field"), files(&b, "field"));

    let other = [&args[..1], &["--seed", "10"], &args[3..]].concat();
    assert!(nlslab(&other, &c).status.success());
    assert_ne!(files(&a, "field"), files(&c, "field"));
}

#[test]
fn census_output_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["census", "--set", "census.kmax=6", "--set", "census.n=2,4", "--set", "census.gaps=4"];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(nlslab(&args, &a).status.code(), Some(0));
    assert_eq!(nlslab(&args, &b).status.code(), Some(0));
    assert_eq!(files(&a, "csv"), files(&b, "csv"));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "census");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let ok = nlslab(&["budget"], &tmp.path().join("ok"));
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS 1d-threshold"));

    // a descending s grid breaks the monotonicity check
    let failed = nlslab(&["budget", "--set", "budget.s=0.9,0.1"], &tmp.path().join("fail"));
    assert_eq!(failed.status.code(), Some(2));
    assert!(tmp.path().join("fail/summary.txt").exists());

    let bad = nlslab(&["budget", "--set", "no.such.key=1"], &tmp.path().join("bad"));
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("no.such.key"));
}

#[test]
fn config_file_and_env_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"budget.n": 256, "budget.s": "0.5, 0.7"}"#).unwrap();
    let env_dir = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_nlslab"))
        .args(["budget", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("from-flag"))
        .env("NLSLAB_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.join("budget.csv").exists());
    let table = std::fs::read_to_string(env_dir.join("budget.csv")).unwrap();
    // header plus two s values for each dimension
    assert_eq!(table.lines().count(), 5);
}
