//! End-to-end tests of the `lorenz5` binary: exit codes, file outputs,
//! config-file precedence, determinism and the JSON mirror.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorenz5"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file readable")
}

#[test]
fn verify_passes_and_reports_all_checks() {
    let out = run(&["verify"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    for name in [
        "antisymmetry",
        "jacobi",
        "casimir",
        "pushforward",
        "hamiltonian_consistency",
    ] {
        assert!(text.contains(name), "missing check {name}:\n{text}");
    }
    assert!(text.contains("# all_passed = true"));
}

#[test]
fn verify_injected_fault_exits_one() {
    let out = run(&["verify", "--inject-fault"]);
    assert_eq!(exit_code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("false"), "some check should fail:\n{text}");
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "this line has no equals sign\n").unwrap();
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("key = value"), "diagnostic missing: {err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "M = 2.0\nk = 0.25\n").unwrap();
    let out_path = dir.path().join("m.csv");
    let out = run(&[
        "melnikov",
        "--config",
        cfg.to_str().unwrap(),
        "--M",
        "1.0",
        "--points",
        "8",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = read(&out_path);
    // Flag wins for M; file supplies k.
    assert!(text.contains("# M = 1.0000000000000000e0"), "{text}");
    assert!(text.contains("# k = 2.5000000000000000e-1"), "{text}");
}

#[test]
fn melnikov_default_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("melnikov.csv");
    let out = run(&["melnikov", "--out", out_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = read(&out_path);
    let data_rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("theta0")).count();
    assert_eq!(data_rows, 128);
    assert!(text.contains("# zero, "), "zeros block missing:\n{text}");
    assert!(text.contains("# degenerate = false"));
    // Two zeros near pi/2 and 3pi/2.
    let zeros: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("# zero, "))
        .map(|l| l.split(", ").nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(zeros.len(), 2);
    assert!((zeros[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    assert!((zeros[1] - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn melnikov_degenerate_k_zero_still_passes() {
    let out = run(&["melnikov", "--k", "0", "--points", "8"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("# degenerate = true"));
}

#[test]
fn melnikov_invalid_radius_exits_two() {
    let out = run(&["melnikov", "--M", "-1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn melnikov_negative_branch_flag_parses() {
    let out = run(&["melnikov", "--branch", "-+-", "--points", "8"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("# branch = -+-"));
    let out_bad = run(&["melnikov", "--branch", "++-"]);
    assert_eq!(exit_code(&out_bad), 2);
}

#[test]
fn melnikov_json_mirror_is_valid() {
    let out = run(&["melnikov", "--points", "16", "--format", "json"]);
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["meta"]["command"], "melnikov");
    assert_eq!(doc["data"]["profile"]["numeric"].as_array().unwrap().len(), 16);
    assert_eq!(doc["data"]["passed"], true);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "simulate",
            "--method",
            "rk4",
            "--step",
            "0.01",
            "--t1",
            "2.0",
            "--eps",
            "0.1",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(read(&a), read(&b));

    let c = dir.path().join("c.csv");
    let d = dir.path().join("d.csv");
    for path in [&c, &d] {
        let out = run(&["melnikov", "--points", "32", "--out", path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(read(&c), read(&d));
}

#[test]
fn simulate_compare_tracks_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sim.csv");
    let out = run(&["simulate", "--compare", "--out", out_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    let text = read(&out_path);
    let dev_line = text
        .lines()
        .find(|l| l.starts_with("# max_deviation = "))
        .expect("deviation trailer");
    let dev: f64 = dev_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev < 1e-6, "max deviation {dev}");
    // Tracked invariant columns present.
    assert!(text.contains("t,mu1,mu2,mu3,u1,u2,H_eps,C,F,I"));
}

#[test]
fn simulate_compare_rejects_nonzero_eps() {
    let out = run(&["simulate", "--compare", "--eps", "0.1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn deltaf_fit_within_tolerance() {
    let out = run(&["deltaf", "--phases", "8"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let rel_line = text
        .lines()
        .find(|l| l.starts_with("# amplitude_rel_err = "))
        .expect("rel err trailer");
    let rel: f64 = rel_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(rel < 0.05, "amplitude error {rel}");
}

#[test]
fn poincare_unperturbed_section() {
    let out = run(&["poincare", "--eps", "0", "--crossings", "5"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("n,")).count();
    assert_eq!(rows, 5);
    let spread_line =
        text.lines().find(|l| l.starts_with("# f_spread = ")).expect("spread trailer");
    let spread: f64 = spread_line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(spread < 1e-8, "F spread {spread}");
}

#[test]
fn lyapunov_short_run() {
    let out = run(&["lyapunov", "--total-time", "20", "--eps", "0.1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("# lambda_max = "));
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("interval,")).count();
    assert_eq!(rows, 20);
}

#[test]
fn sweep_single_cell_and_empty_grid() {
    let out = run(&["sweep", "--task", "params"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("eps,")).count();
    assert_eq!(rows, 1);

    let bad = run(&["sweep", "--task", "params", "--grid-m", "1:2:0"]);
    assert_eq!(exit_code(&bad), 2);
}

#[test]
fn sweep_melnikov_amplitudes_increase_with_m() {
    let out = run(&["sweep", "--task", "melnikov", "--grid-m", "0.5:2:4"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let numerics: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("eps,"))
        .map(|l| l.split(',').nth(4).unwrap().parse::<f64>().unwrap().abs())
        .collect();
    assert_eq!(numerics.len(), 4);
    assert!(numerics.windows(2).all(|w| w[0] < w[1]), "{numerics:?}");
}

#[test]
fn unknown_flag_exits_two() {
    let out = run(&["melnikov", "--frobnicate"]);
    assert_eq!(exit_code(&out), 2);
}
