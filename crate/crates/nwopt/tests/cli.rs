//! End-to-end tests of the `nwopt` binary: exit codes, file formats, seed
//! override, and worker-count independence of report files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nwopt::estimator::nw_estimate;
use nwopt::types::{validate_dataset, LossModel};

fn nwopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nwopt"))
}

fn stdout_line<'a>(output: &'a Output, prefix: &str) -> &'a str {
    std::str::from_utf8(&output.stdout)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix(prefix))
        .unwrap_or_else(|| panic!("missing line {prefix:?} in {:?}", output))
}

fn write_three_point_csv(path: &Path) {
    // gamma {0.0, 0.5, 1.0}; with cu=co=1 and x=0.5 the losses at the
    // first two rows are 0.2 and 0.4
    fs::write(path, "g1,xi1\n0.0,0.7\n0.5,0.9\n1.0,1.4\n").unwrap();
}

#[test]
fn estimate_matches_library_value() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_three_point_csv(&csv);

    let output = nwopt()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--query", "0.25", "--x", "0.5", "--bandwidth", "0.3"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert_eq!(stdout_line(&output, "neighbors: "), "2");
    assert_eq!(stdout_line(&output, "empty_neighborhood: "), "false");

    // same oracle as the library path, bit for bit
    let rows = vec![vec![0.0, 0.7], vec![0.5, 0.9], vec![1.0, 1.4]];
    let data = validate_dataset(&rows, 1, 1).unwrap();
    let loss = LossModel::new("newsvendor", 1.0, 1.0, |x, xi| (xi[0] - x[0]).abs()).unwrap();
    let expected = nw_estimate(&data, &loss, &[0.5], &[0.25], 0.3).unwrap();
    let printed: f64 = stdout_line(&output, "estimate: ").parse().unwrap();
    assert_eq!(printed.to_bits(), expected.value.to_bits());
    assert!((printed - 0.3).abs() < 1e-15);
}

#[test]
fn estimate_empty_neighborhood_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_three_point_csv(&csv);

    let output = nwopt()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--query", "5.0", "--x", "0.5", "--bandwidth", "0.3"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout_line(&output, "estimate: "), "0");
    assert_eq!(stdout_line(&output, "empty_neighborhood: "), "true");
    assert_eq!(stdout_line(&output, "neighbors: "), "0");
}

#[test]
fn malformed_csv_row_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    fs::write(&csv, "g1,xi1\n0.0,0.7\nnot-a-number,0.4\n").unwrap();

    let output = nwopt()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--query", "0.25", "--x", "0.5", "--bandwidth", "0.3"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("line 3"), "stderr was: {stderr}");
}

#[test]
fn dimension_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_three_point_csv(&csv);

    let output = nwopt()
        .args(["estimate", "--data"])
        .arg(&csv)
        .args(["--query", "0.25,0.5", "--x", "0.5", "--bandwidth", "0.3"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_required_flag_exits_two() {
    let output = nwopt().args(["estimate", "--x", "0.5"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn solve_reports_argmin_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    fs::write(
        &csv,
        "g1,xi1\n0.50,0.40\n0.52,0.45\n0.48,0.50\n0.51,0.55\n0.49,0.60\n",
    )
    .unwrap();
    let json_path = dir.path().join("solve.json");

    let output = nwopt()
        .args(["solve", "--data"])
        .arg(&csv)
        .args(["--query", "0.5", "--bandwidth", "0.1", "--tau", "0.25", "--json-out"])
        .arg(&json_path)
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    // net {0, 0.5, 1}: mean |xi - x| is minimized at 0.5
    assert_eq!(stdout_line(&output, "x_hat: "), "0.5");
    assert_eq!(stdout_line(&output, "net_size: "), "3");
    assert_eq!(stdout_line(&output, "empty_neighborhood: "), "false");

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(json["x_hat"][0], 0.5);
    assert_eq!(json["net_size"], 3);
}

#[test]
fn solve_empty_neighborhood_returns_first_net_point() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_three_point_csv(&csv);

    let output = nwopt()
        .args(["solve", "--data"])
        .arg(&csv)
        .args(["--query", "9.0", "--bandwidth", "0.1", "--tau", "0.25"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(stdout_line(&output, "x_hat: "), "0");
    assert_eq!(stdout_line(&output, "objective_value: "), "0");
    assert_eq!(stdout_line(&output, "empty_neighborhood: "), "true");
}

#[test]
fn bandwidth_reproduces_worked_example() {
    // |X_tau| = 100 via the scaled covering mode with D/tau = 100;
    // (4000 / ln 4000)^(-1/3), recomputed independently
    let output = nwopt()
        .args([
            "bandwidth",
            "--n",
            "1000",
            "--delta",
            "0.05",
            "--tau",
            "0.01",
            "--covering-constant",
            "1.0",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let h: f64 = stdout_line(&output, "optimal_bandwidth: ").parse().unwrap();
    assert!(((h - 0.12751723278594965) / h).abs() < 1e-12);
    let n_tau: f64 = stdout_line(&output, "covering_number: ").parse().unwrap();
    assert_eq!(n_tau, 100.0);
}

#[test]
fn bound_prints_raw_and_clamped_probabilities() {
    let output = nwopt()
        .args([
            "bound", "--n", "1000", "--h", "0.1", "--epsilon", "0.5", "--tau", "0.05",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let raw: f64 = stdout_line(&output, "failure_probability_raw: ")
        .parse()
        .unwrap();
    let clamped: f64 = stdout_line(&output, "failure_probability: ").parse().unwrap();
    // independently recomputed 2 exp(-25)
    assert!(((raw - 2.7775887729928042e-11) / raw).abs() < 1e-12);
    assert_eq!(raw, clamped);
    assert!(stdout_line(&output, "covering_mode: ").contains("ball"));

    // epsilon = 0 clamps the vacuous bound to 1
    let output = nwopt()
        .args(["bound", "--n", "1000", "--h", "0.1", "--epsilon", "0.0"])
        .output()
        .unwrap();
    let raw: f64 = stdout_line(&output, "failure_probability_raw: ")
        .parse()
        .unwrap();
    let clamped: f64 = stdout_line(&output, "failure_probability: ").parse().unwrap();
    assert_eq!(raw, 2.0);
    assert_eq!(clamped, 1.0);
}

#[test]
fn complexity_reproduces_worked_example() {
    let output = nwopt()
        .args(["complexity", "--epsilon", "0.2", "--delta", "0.05"])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    assert_eq!(stdout_line(&output, "sample_complexity: "), "436500");
    assert_eq!(stdout_line(&output, "tau: "), "0.025");
    assert_eq!(stdout_line(&output, "covering_number: "), "81");
}

#[test]
fn invalid_params_exit_two() {
    let output = nwopt()
        .args(["complexity", "--epsilon", "1.5", "--delta", "0.05"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let output = nwopt()
        .args(["bandwidth", "--n", "1000", "--delta", "1.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn generate_round_trips_and_respects_seed_env() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");

    let run = |path: &Path, seed: &str, env_seed: Option<&str>| {
        let mut cmd = nwopt();
        cmd.args(["generate", "--n", "50", "--p", "2", "--seed", seed, "--out"])
            .arg(path);
        match env_seed {
            Some(s) => cmd.env("NWOPT_SEED", s),
            None => cmd.env_remove("NWOPT_SEED"),
        };
        let output = cmd.output().unwrap();
        assert!(output.status.success(), "{output:?}");
    };

    run(&a, "5", None);
    run(&b, "7", Some("5")); // env overrides the flag
    run(&c, "7", None);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let data = cli_read(&a);
    assert_eq!(data.n(), 50);
    assert_eq!(data.covariate_dim(), 2);
    assert_eq!(data.outcome_dim(), 1);
}

fn cli_read(path: &Path) -> nwopt::Dataset {
    nwopt::cli::read_dataset_from_path(path).unwrap()
}

fn small_experiment_config(dir: &Path, workers: Option<usize>) -> std::path::PathBuf {
    let config = serde_json::json!({
        "experiment": "coverage",
        "problem": { "covariate_dim": 1 },
        "x_fixed": [0.5],
        "gamma_query": [0.5],
        "n": 300,
        "h": 0.15,
        "epsilon": 0.3,
        "trials": 200,
        "base_seed": 99,
        "workers": workers,
        "output": {
            "records_csv": dir.join("records.csv"),
            "report_json": dir.join("report.json"),
        }
    });
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn experiment_writes_reports_and_exits_zero_on_pass() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_experiment_config(dir.path(), None);

    let output = nwopt()
        .args(["experiment", "--config"])
        .arg(&config)
        .env_remove("NWOPT_SEED")
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("PASS violation_rate_within_bound"), "{stdout}");
    assert!(stdout.contains("PASS triangle_inequality"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");

    let csv = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(csv.starts_with("trial_index,seed,n,abs_error"));
    assert_eq!(csv.lines().count(), 201);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["experiment"], "coverage");
    assert_eq!(report["trials"], 200);
}

#[test]
fn experiment_reports_identical_across_worker_flags() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&dir1, "1"), (&dir2, "8")] {
        let config = small_experiment_config(dir.path(), None);
        let output = nwopt()
            .args(["experiment", "--workers", workers, "--config"])
            .arg(&config)
            .env_remove("NWOPT_SEED")
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
    }
    assert_eq!(
        fs::read(dir1.path().join("records.csv")).unwrap(),
        fs::read(dir2.path().join("records.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir1.path().join("report.json")).unwrap(),
        fs::read(dir2.path().join("report.json")).unwrap()
    );
}

#[test]
fn experiment_failed_assertion_exits_one() {
    // an impossibly narrow slope window makes the rate assertion fail,
    // which is a statistical failure (exit 1), not a usage error (exit 2)
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "experiment": "rate",
        "problem": { "covariate_dim": 1 },
        "x_fixed": [0.9],
        "gamma_query": [0.5],
        "n_grid": [256, 512, 1024],
        "trials_per_n": 100,
        "delta": 0.05,
        "tau": 0.05,
        "slope_window": 1e-9,
        "base_seed": 4,
        "output": {
            "records_csv": dir.path().join("r.csv"),
            "report_json": dir.path().join("r.json"),
        }
    });
    let path = dir.path().join("config.json");
    fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();

    let output = nwopt()
        .args(["experiment", "--config"])
        .arg(&path)
        .env_remove("NWOPT_SEED")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("FAIL rate_slope_within_window"), "{stdout}");
    // report files are still written for post-mortem analysis
    assert!(dir.path().join("r.csv").exists());
    assert!(dir.path().join("r.json").exists());
}

#[test]
fn experiment_invalid_delta_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "experiment": "suboptimality",
        "problem": { "covariate_dim": 1 },
        "gamma_query": [0.5],
        "n": 500,
        "trials": 100,
        "delta": 1.5,
        "tau": 0.05,
        "base_seed": 1,
        "output": {
            "records_csv": dir.path().join("r.csv"),
            "report_json": dir.path().join("r.json"),
        }
    });
    let path = dir.path().join("config.json");
    fs::write(&path, serde_json::to_string(&config).unwrap()).unwrap();

    let output = nwopt()
        .args(["experiment", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn experiment_unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(
        &path,
        r#"{"experiment":"coverage","problem":{"covariate_dim":1},"gamma_query":[0.5],
            "base_seed":1,"output":{"records_csv":"r.csv","report_json":"r.json"},
            "trails": 100}"#,
    )
    .unwrap();
    let output = nwopt()
        .args(["experiment", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("trails"), "stderr: {stderr}");
}
