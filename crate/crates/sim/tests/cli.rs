use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_robust-hedge"))
}

#[test]
fn verify_emits_one_passing_json_line_per_check() {
    let out = cli().args(["verify", "--quick", "--seed", "5"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let reports: Vec<serde_json::Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let checks: Vec<&str> = reports.iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(
        checks,
        [
            "second_order_bound",
            "adaptive_regret_inequality",
            "entropy_lemma",
            "stability_ratio",
            "observations",
            "sum_bounds",
            "fixed_equivalence",
            "adaptive_divergence"
        ]
    );
    for r in &reports {
        assert_eq!(r["violations"], 0);
        assert_eq!(r["passed"], true);
        assert_eq!(r["seed"], 5);
        assert!(r["first_violation"].is_null());
        assert!(r["worst_slack"].as_f64().unwrap() >= -1e-9);
    }
}

#[test]
fn run_streams_csv_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{ "delta": 0.4, "budgets": [0], "horizon": 64, "trials": 3, "checkpoints": [32, 64] }"#,
    )
    .unwrap();
    let out = cli().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(text.starts_with(robust_hedge::CSV_HEADER));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{ "delta": 0.2, "budgets": [10], "horizon": 200, "trials": 4, "base_seed": 1 }"#,
    )
    .unwrap();
    let run = |seed: &str| {
        let out = cli()
            .args(["run", "--seed", seed, "--config"])
            .arg(&config)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("1"));
    assert_ne!(run("1"), run("2"));
}

#[test]
fn bad_config_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{ "delta": 0.4, "horizn": 10 }"#).unwrap();
    let out = cli().arg("run").arg("--config").arg(&config).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("horizn"));
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{ "delta": 0.4 }"#).unwrap();
    let out = cli()
        .arg("sweep")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("no/such/dir.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
}
