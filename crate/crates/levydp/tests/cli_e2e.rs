//! Drives the compiled binary end to end: exit codes, stdout reports,
//! written files, environment handling, and agreement with direct
//! library calls.

use std::path::Path;
use std::process::{Command, Output};

use levydp::accountant::NoiseSpec;
use levydp::constants::StableIndex;
use levydp::simulator::{run_pair, Dataset, InitialState, LossSpec, NeighborPair, SimConfig};
use levydp::stable_noise::RngSeed;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levydp"))
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

fn account_args<'a>(out: &'a str) -> Vec<&'a str> {
    vec![
        "account", "--mode", "multifractal", "--setting", "continuous", "--beta", "2", "--t",
        "100", "--delta", "0.01", "--n", "10", "--sg", "1", "--gamma", "1", "--sigma2", "1",
        "--out", out,
    ]
}

#[test]
fn account_reports_the_uniform_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&account_args(out));
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let text = stdout(&output);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "beta,kappa,regime,epsilon_at_delta,zero_delta"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    let kappa: f64 = fields[1].parse().unwrap();
    assert!((kappa - 0.020_202_707_317_301_523).abs() < 1e-12, "kappa {kappa}");
    assert_eq!(fields[2], "time-uniform");

    assert_eq!(read(dir.path(), "account.csv"), text);
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("accounting.t = 100"), "{manifest}");
    assert!(manifest.contains("problem.d = 1"), "defaults echoed: {manifest}");
}

#[test]
fn zero_sensitivity_epsilon_is_only_the_delta_term() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = account_args(out);
    let position = args.iter().position(|a| *a == "--sg").unwrap();
    args[position + 1] = "0";
    let output = run(&args);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields[1].parse::<f64>().unwrap(), 0.0);
    let epsilon: f64 = fields[3].parse().unwrap();
    assert!((epsilon - 100.0f64.ln()).abs() < 1e-12, "epsilon {epsilon}");
}

#[test]
fn missing_required_flag_exits_two_naming_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = account_args(out);
    let position = args.iter().position(|a| *a == "--t").unwrap();
    args.drain(position..position + 2);
    let output = run(&args);
    assert_eq!(output.status.code(), Some(2));
    let message = stderr(&output);
    assert!(
        message.contains("accounting.t") && message.contains("--t"),
        "{message}"
    );
}

#[test]
fn unknown_config_file_key_exits_two_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ini");
    std::fs::write(&path, "problem.n = 10\nno.such = 1\n").unwrap();
    let output = run(&["account", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("no.such"), "{}", stderr(&output));
}

#[test]
fn unknown_suite_exits_two() {
    let output = run(&["verify", "--suite", "nonsense"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("nonsense"), "{}", stderr(&output));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ini");
    std::fs::write(
        &path,
        "accounting.mode = multifractal\naccounting.setting = continuous\n\
         accounting.beta = 2\naccounting.t = 100\naccounting.delta = 0.01\n\
         problem.n = 10\nproblem.sg = 1\nproblem.gamma = 1\nnoise.sigma2 = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = run(&[
        "account",
        "--config",
        path.to_str().unwrap(),
        "--n",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    let manifest = read(&out, "manifest.txt");
    assert!(manifest.contains("problem.n = 20"), "{manifest}");
}

#[test]
fn domain_error_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&[
        "account", "--mode", "multifractal", "--setting", "continuous", "--beta", "2", "--t",
        "1", "--delta", "0.01", "--n", "10", "--sg", "1e308", "--gamma", "1", "--sigma2",
        "1e-300", "--out", out,
    ]);
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr(&output));
}

#[test]
fn thread_count_env_var_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = binary()
        .args(account_args(out))
        .env("LEVYDP_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let output = binary()
        .args(account_args(out))
        .env("LEVYDP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("LEVYDP_THREADS"), "{}", stderr(&output));
}

#[test]
fn verify_bregman_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&["verify", "--suite", "bregman", "--seed", "7", "--out", out]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let report = read(dir.path(), "report.csv");
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "check_name,parameter_json,lhs,rhs,margin,mc_error,pass");
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        assert!(row.ends_with(",true"), "failing row: {row}");
    }
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("result.failures = 0"), "{manifest}");
    assert!(manifest.contains("verify.seed = 7"), "{manifest}");
}

#[test]
fn verify_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = dir.path().to_str().unwrap();
        let output = run(&["verify", "--suite", "sampler", "--seed", "5", "--out", out]);
        assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    }
    let a = std::fs::read(dir_a.path().join("report.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("report.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_all_concatenates_the_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&["verify", "--suite", "all", "--seed", "3", "--out", out]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let report = read(dir.path(), "report.csv");
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert_eq!(rows.len(), 18, "{report}");
    for prefix in ["bregman_", "bbm_", "sampler_", "poincare_", "renyi_", "flow_"] {
        assert!(
            rows.iter().any(|row| row.starts_with(prefix)),
            "no {prefix} rows in: {report}"
        );
    }
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("result.checks = 18"), "{manifest}");
    assert!(manifest.contains("result.failures = 0"), "{manifest}");

    let single_dir = tempfile::tempdir().unwrap();
    let single_out = single_dir.path().to_str().unwrap();
    let output = run(&["verify", "--suite", "bregman", "--seed", "3", "--out", single_out]);
    assert_eq!(output.status.code(), Some(0));
    let single = read(single_dir.path(), "report.csv");
    for row in single.lines().skip(1) {
        assert!(rows.contains(&row), "suite row missing from all: {row}");
    }
}

#[test]
fn simulate_trace_matches_the_library_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&[
        "simulate",
        "--n",
        "3",
        "--d",
        "2",
        "--steps",
        "8",
        "--eta",
        "0.1",
        "--sigma2",
        "0.7",
        "--sigma-alpha",
        "0.5",
        "--alpha",
        "1.5",
        "--data-gap",
        "1",
        "--init-point",
        "0.25,-0.5",
        "--trajectories",
        "1",
        "--seed",
        "42",
        "--out",
        out,
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let base = vec![vec![0.0; 2]; 3];
    let mut moved = base.clone();
    moved[2][0] = 1.0;
    let pair = NeighborPair::new(
        Dataset::new(base, None).unwrap(),
        Dataset::new(moved, None).unwrap(),
        2,
    )
    .unwrap();
    let sim = SimConfig {
        loss: LossSpec::Quadratic,
        noise: Some(
            NoiseSpec::new(StableIndex::new(1.5).unwrap(), 0.5, 0.7).unwrap(),
        ),
        step_size: 0.1,
        steps: 8,
        batch_size: 3,
        projection_radius: None,
        init: InitialState::Point(vec![0.25, -0.5]),
    };
    let trace = run_pair(&pair, &sim, RngSeed(42).split(0)).unwrap();
    let mut expected = Vec::new();
    trace.write_csv(&mut expected).unwrap();

    let written = std::fs::read(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(written, expected);
}

#[test]
fn simulate_without_noise_follows_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&[
        "simulate",
        "--n",
        "1",
        "--steps",
        "50",
        "--eta",
        "0.1",
        "--data-gap",
        "0",
        "--init-point",
        "2",
        "--trajectories",
        "1",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let trace = read(dir.path(), "trajectory.csv");
    let mut rows = 0;
    for line in trace.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let step: i32 = fields[0].parse().unwrap();
        let value: f64 = fields[2].parse().unwrap();
        let expected = 2.0 * 0.9f64.powi(step);
        assert!(
            (value - expected).abs() <= 1e-10,
            "step {step} side {}: {value} vs {expected}",
            fields[1]
        );
        rows += 1;
    }
    assert_eq!(rows, 2 * 51);
}

#[test]
fn simulate_overflow_exits_three_recording_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let output = run(&[
        "simulate",
        "--n",
        "1",
        "--steps",
        "5",
        "--eta",
        "1e200",
        "--sigma2",
        "1",
        "--trajectories",
        "2",
        "--seed",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(output.status.code(), Some(3), "stderr: {}", stderr(&output));
    assert!(stderr(&output).contains("overflowed"), "{}", stderr(&output));
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("result.truncated_at_step = 1"), "{manifest}");
}

#[test]
fn sweep_kappa_decreases_with_dataset_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let mut args = account_args(out);
    args[0] = "sweep";
    args.extend(["--axis", "n", "--values", "10,20,40,80"]);
    let output = run(&args);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));

    let text = read(dir.path(), "sweep.csv");
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "axis,value,beta,kappa,regime,epsilon_at_delta,zero_delta,error"
    );
    let kappas: Vec<f64> = lines
        .map(|line| line.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(kappas.len(), 4);
    for pair in kappas.windows(2) {
        assert!(pair[1] < pair[0], "kappa not decreasing: {kappas:?}");
    }
}
