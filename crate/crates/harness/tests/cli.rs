use std::path::Path;
use std::process::{Command, Output};

fn qhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qhd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn classify_default_state() {
    let o = qhd(&[
        "classify",
        "--gamma",
        "2",
        "--rho-star",
        "1",
        "--m-star",
        "1",
        "--mu",
        "1",
        "--k",
        "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("Subsonic, alpha*=1\n"), "{text}");
    assert!(text.contains("theta="));
}

#[test]
fn classify_zero_momentum_is_subsonic() {
    for gamma in ["1.1", "2", "5"] {
        let o = qhd(&["classify", "--m-star", "0", "--gamma", gamma]);
        assert!(stdout(&o).starts_with("Subsonic"));
    }
}

#[test]
fn classify_rejects_zero_density() {
    assert_eq!(qhd(&["classify", "--rho-star", "0"]).status.code(), Some(2));
}

#[test]
fn classify_supersonic_omits_compensator_constants() {
    let text = stdout(&qhd(&["classify", "--m-star", "2"]));
    assert!(text.starts_with("Supersonic, alpha*=-2"), "{text}");
    assert!(!text.contains("theta"));
}

#[test]
fn symbol_subsonic_roots_in_left_half_plane() {
    let o = qhd(&["symbol"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("xi,alpha,re_lambda_plus,im_lambda_plus,re_lambda_minus,im_lambda_minus,"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 4000);
    assert!(rows.iter().all(|r| r[2] <= 0.0 && r[4] <= 0.0));
}

#[test]
fn symbol_supersonic_has_growing_rows() {
    let rows = csv_rows(&stdout(&qhd(&["symbol", "--m-star", "2"])));
    assert!(rows.iter().any(|r| r[2] > 0.0));
}

#[test]
fn symbol_single_point_at_origin() {
    let o = qhd(&[
        "symbol",
        "--spacing",
        "linear",
        "--points",
        "1",
        "--xi-min",
        "0",
        "--xi-max",
        "0",
    ]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][2..6].iter().all(|v| *v == 0.0));
}

#[test]
fn symbol_bad_range_and_unwritable_output() {
    assert_eq!(
        qhd(&["symbol", "--xi-min", "5", "--xi-max", "1"]).status.code(),
        Some(2)
    );
    let o = qhd(&["symbol", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn symbol_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        assert!(qhd(&["symbol", "--points", "200", "--out", p.to_str().unwrap()])
            .status
            .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn check_reports_each_component() {
    let text = stdout(&qhd(&["check", "--trials", "50"]));
    for key in [
        "dissipativity: strict",
        "coupling:",
        "compensator:",
        "c_fitted",
        "violations",
    ] {
        assert!(text.contains(key), "{key} missing from {text}");
    }
}

#[test]
fn linear_decay_fits_predicted_rates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("decay.csv");
    let o = qhd(&[
        "linear-decay",
        "--t-min",
        "100",
        "--points",
        "12",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let exponents: Vec<f64> = stdout(&o)
        .lines()
        .filter_map(|l| l.split("exponent=").nth(1))
        .map(|s| s.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert!((0.20..=0.30).contains(&exponents[0]), "{exponents:?}");
    assert!((0.70..=0.80).contains(&exponents[1]), "{exponents:?}");
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("t,norm_ell0,norm_ell1,fit_ell0,fit_ell1\n"));
    assert_eq!(csv_rows(&csv).len(), 12);
}

#[test]
fn linear_decay_single_time_is_refused() {
    assert_eq!(qhd(&["linear-decay", "--points", "1"]).status.code(), Some(2));
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    qhd(&args)
}

#[test]
fn simulate_zero_amplitude_gives_zero_history() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(
        &cfg,
        "[grid]\nL = 100.0\nN = 256\n[time]\nt_end = 1.0\n[initial]\nrho_amplitude = 0.0\n",
    )
    .unwrap();
    let o = simulate(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("history.csv")).unwrap());
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| *v == 0.0)));
    assert!(dir.path().join("snapshot.txt").exists());
}

#[test]
fn simulate_small_pulse_conserves() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--length", "200", "--points", "1024", "--t-end", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("history.csv")).unwrap());
    assert!(rows
        .iter()
        .all(|r| r[7].abs() <= 1e-10 && r[8].abs() <= 1e-10 && r[6].is_finite()));
}

#[test]
fn simulate_supersonic_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = simulate(dir.path(), &["--m-star", "2", "--t-end", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--allow-supersonic"));
}

#[test]
fn simulate_abort_reports_time_and_cause() {
    let dir = tempfile::tempdir().unwrap();
    // a deep density dip drives the solver through the floor
    let o = simulate(
        dir.path(),
        &[
            "--length",
            "50",
            "--points",
            "256",
            "--t-end",
            "5",
            "--rho-amplitude=-0.999999",
            "--rho-width",
            "0.5",
        ],
    );
    assert_eq!(o.status.code(), Some(5), "{}", stdout(&o));
    assert!(stdout(&o).contains("aborted at t="));
    assert!(dir.path().join("history.csv").exists());
}

#[test]
fn simulate_rejects_bad_config_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "[time]\nt_end = -1.0\n").unwrap();
    let o = simulate(dir.path(), &["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("time.t_end"));
}

#[test]
fn accept_filter_runs_one_group() {
    let o = qhd(&["accept", "--filter", "symbol"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(
        text.lines()
            .filter(|l| l.contains("PASS") || l.contains("FAIL"))
            .count(),
        4
    );
}

#[test]
fn accept_mutated_theta_fails() {
    let o = qhd(&["accept", "--filter", "symbol", "--mutate-theta", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(" 3 FAIL"));
}
