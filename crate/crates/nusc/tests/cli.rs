use std::process::Command;

fn nusc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_nusc")).args(args).output().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn successful_run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "b.json", r#"{ "experiment": "bounds", "source": { "dsbs": { "p": 0.1 } }, "n": [10, 100] }"#);
    let out = dir.path().join("res/b.csv");
    let o = nusc(&["bounds", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("sampler_bound"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("experiment,config_hash,n,codebook,trial,metric,value,flags\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/b.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "bounds");
}

#[test]
fn seed_and_trials_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "s.json",
        r#"{ "source": { "block_diag": { "masses": [0.6, 0.4] } }, "n": [4], "delta": 0.2, "trials": 50, "codebooks": 1 }"#,
    );
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = nusc(&["sw", "--config", &cfg, "--seed", seed, "--trials", "7", "--mode", "mc", "--quiet", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("3", "a.csv");
    assert_eq!(a, run("3", "a2.csv"));
    assert_ne!(a, run("4", "c.csv"));
    assert!(a.contains(",6,trial_block_error,") && !a.contains(",7,trial_block_error,"));
    assert!(a.contains(",mc"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "bad.json", r#"{ "source": { "dsbs": { "p": 0.1 } }, "n": [4], "codebok": 3 }"#);
    let o = nusc(&["sw", "--config", &cfg, "--out", dir.path().join("x.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("codebok"));

    let cfg = write(&dir, "kind.json", r#"{ "experiment": "wz", "source": { "dsbs": { "p": 0.1 } }, "n": [4] }"#);
    let o = nusc(&["sw", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));

    // a source without a common part cannot feed the distributed code
    let cfg = write(&dir, "trivial.json", r#"{ "source": { "dsbs": { "p": 0.1 } }, "n": [4] }"#);
    let o = nusc(&["sw", "--config", &cfg, "--out", dir.path().join("t.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("common part"));
}

#[test]
fn budget_errors_exit_with_3_and_suggest_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "big.json", r#"{ "source": { "dsbs": { "p": 0.1 } }, "n": [30], "codebooks": 1, "resolve": { "rate_offset": 0.2 } }"#);
    let o = nusc(&["resolve", "--config", &cfg, "--out", dir.path().join("r.csv").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Monte-Carlo"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = nusc(&["wz", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(1));
}
