use proptest::prelude::*;
use serde_json::Value;
use thetaquad::bounds::bound_linf;
use thetaquad::kernel::{kernel_stats_closed, RuleSpec};
use thetaquad_cli::{run_with_env, Outcome, EXIT_CONVERGENCE, EXIT_OK, EXIT_VALIDATION};

fn run(args: &[&str]) -> Outcome {
    run_with_env(std::iter::once("thetaquad").chain(args.iter().copied()), None)
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

fn result(v: &Value, key: &str) -> f64 {
    v["results"][key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * y.abs().max(1e-300)
}

#[test]
fn kernel_example_values() {
    let v = json(&["kernel", "--n", "2", "--theta", "0.333333333333", "--a", "0", "--b", "1"]);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["command"], "kernel");
    assert!(result(&v, "integral").abs() < 1e-12);
    assert!(close(result(&v, "abs_integral"), 1.0 / 81.0, 1e-9));
    assert!(close(result(&v, "max_abs"), 1.0 / 24.0, 1e-9));
    assert!(close(result(&v, "l2_sq"), 1.0 / 4320.0, 1e-9));
    assert!(close(result(&v, "centered_max"), 1.0 / 24.0, 1e-9));
    let keys: Vec<&str> = v["results"].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["integral", "abs_integral", "max_abs", "l2_sq", "centered_max"]);
}

#[test]
fn kernel_odd_order_has_no_centered_max() {
    let v = json(&["kernel", "--n", "3", "--theta", "0.5", "--a", "0", "--b", "1", "--brute-force"]);
    assert!(v["results"]["centered_max"].is_null());
    assert!(result(&v, "max_rel_diff") <= 1e-10);
}

#[test]
fn integrate_example_values() {
    let v = json(&[
        "integrate", "--f", "exp", "--n", "2", "--theta", "0", "--a", "0", "--b", "1", "--panels", "1",
        "--bound", "linf", "--linf", "2.718281828459045",
    ]);
    assert!(close(result(&v, "value"), 0.5f64.exp(), 1e-15));
    assert!(close(result(&v, "bound"), std::f64::consts::E / 24.0, 1e-14));
    assert!(close(result(&v, "true_error"), std::f64::consts::E - 1.0 - 0.5f64.exp(), 1e-12));
    assert_eq!(v["results"]["rigor"], "rigorous");
}

#[test]
fn sharpness_example_values() {
    let v = json(&["sharpness", "--n", "1", "--theta", "0.5", "--a", "0", "--b", "1"]);
    assert!((result(&v, "ratio") - 1.0).abs() <= 1e-10);
    assert!(close(result(&v, "lhs"), 1.0 / 48.0, 1e-13));
    let v = json(&["sharpness", "--n", "3", "--theta", "1", "--a", "0", "--b", "1", "--end-to-end"]);
    assert!(result(&v, "end_to_end_rel_diff") <= 1e-9);
}

#[test]
fn numbers_round_trip_exactly() {
    let spec = RuleSpec::new(0.7, 5, -1.0, 2.0).unwrap();
    let stats = kernel_stats_closed(&spec);
    let v = json(&["kernel", "--n", "5", "--theta", "0.7", "--a", "-1", "--b", "2"]);
    assert_eq!(result(&v, "abs_integral").to_bits(), stats.abs_integral.to_bits());
    assert_eq!(result(&v, "l2_sq").to_bits(), stats.l2_sq.to_bits());
    let v = json(&["bound", "--n", "4", "--rule", "simpson", "--a", "0", "--b", "1", "--bound", "linf", "--linf", "1"]);
    let want = bound_linf(&RuleSpec::new(1.0 / 3.0, 4, 0.0, 1.0).unwrap(), 1.0).unwrap().bound;
    assert_eq!(result(&v, "bound").to_bits(), want.to_bits());
}

#[test]
fn named_rules_and_presets() {
    let v = json(&["bound", "--n", "4", "--rule", "simpson", "--a", "0", "--b", "1", "--bound", "linf", "--linf", "1"]);
    assert!(close(result(&v, "bound"), 1.0 / 2880.0, 1e-14));
    assert_eq!(v["inputs"]["rule"], "simpson");
    let out = run(&["bound", "--n", "4", "--rule", "boole", "--a", "0", "--b", "1", "--bound", "linf", "--linf", "1"]);
    assert_eq!(out.code, EXIT_VALIDATION);
    let out = run(&["kernel", "--n", "2", "--rule", "midpoint", "--theta", "0", "--a", "0", "--b", "1"]);
    assert_eq!(out.code, EXIT_VALIDATION);
}

#[test]
fn bound_examples() {
    let v = json(&["bound", "--n", "3", "--theta", "1", "--a", "0", "--b", "1", "--bound", "band-lower", "--lower", "0", "--rate", "1"]);
    assert!(close(result(&v, "bound"), 1.0 / 24.0, 1e-14));
    assert_eq!(v["results"]["certificate"], "one-sided-odd-lower");
    let v = json(&["bound", "--n", "1", "--theta", "0", "--a", "0", "--b", "1", "--bound", "band", "--lower", "0", "--upper", "1"]);
    assert!(close(result(&v, "bound"), 1.0 / 8.0, 1e-14));
    let v = json(&["bound", "--n", "2", "--theta", "1", "--a", "0", "--b", "1", "--bound", "band-upper", "--upper", "2", "--rate", "1"]);
    assert!(close(result(&v, "bound"), 1.0 / 12.0, 1e-14));
    assert_eq!(v["results"]["covers_perturbed_rule"], true);
    let v = json(&["bound", "--n", "1", "--theta", "0.5", "--a", "0", "--b", "1", "--bound", "sharp", "--sigma", "1"]);
    assert!(close(result(&v, "bound"), 1.0 / (4.0 * 3f64.sqrt()), 1e-14));
    // Exact norms from a builtin when no flags are given.
    let v = json(&["bound", "--f", "sin:3", "--n", "3", "--theta", "0.5", "--a", "-1", "--b", "2", "--bound", "l1"]);
    assert_eq!(v["results"]["rigor"], "rigorous");
    assert!(result(&v, "used_l1") > 0.0);
}

#[test]
fn missing_inputs_are_validation_errors() {
    for args in [
        &["bound", "--n", "3", "--theta", "0.5", "--a", "0", "--b", "1", "--bound", "l1"][..],
        &["bound", "--n", "3", "--theta", "0.5", "--a", "0", "--b", "1"],
        &["bound", "--n", "3", "--theta", "0.5", "--a", "0", "--b", "1", "--bound", "band", "--lower", "0"],
        &["bound", "--n", "3", "--theta", "0.5", "--a", "0", "--b", "1", "--bound", "l1", "--l1", "-1"],
        &["bound", "--n", "3", "--theta", "1", "--a", "0", "--b", "1", "--bound", "band-lower", "--lower", "2", "--rate", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.code, EXIT_VALIDATION, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(out.stderr.starts_with("error:"), "{}", out.stderr);
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["kernel", "--n", "2", "--theta", "0.5", "--a", "0", "--b", "1", "--bogus"],
    ] {
        let out = run(args);
        assert_eq!(out.code, EXIT_VALIDATION, "{args:?}");
        assert!(out.stderr.contains("Usage:"), "{}", out.stderr);
    }
    for args in [
        &["kernel", "--n", "2", "--a", "0", "--b", "1"][..],
        &["integrate", "--f", "exp", "--n", "x", "--theta", "0", "--a", "0", "--b", "1"],
    ] {
        let out = run(args);
        assert_eq!(out.code, EXIT_VALIDATION, "{args:?}");
        assert!(out.stderr.starts_with("error:"), "{}", out.stderr);
    }
    let help = run(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("integrate"));
}

#[test]
fn domain_errors_exit_two() {
    for args in [
        &["kernel", "--n", "2", "--theta", "1.5", "--a", "0", "--b", "1"][..],
        &["kernel", "--n", "0", "--theta", "0.5", "--a", "0", "--b", "1"],
        &["kernel", "--n", "2", "--theta", "0.5", "--a", "1", "--b", "0"],
        &["integrate", "--f", "cosh", "--n", "2", "--theta", "0", "--a", "0", "--b", "1"],
        &["integrate", "--f", "exp", "--n", "3", "--theta", "0", "--a", "0", "--b", "1", "--perturbed"],
        &["integrate", "--f", "exp", "--n", "2", "--theta", "0", "--a", "0", "--b", "1", "--panels", "0"],
        &["integrate", "--f", "exp", "--n", "40", "--theta", "0", "--a", "0", "--b", "1", "--bound", "l1"],
        &["sharpness", "--n", "5", "--theta", "0.5", "--a", "0", "--b", "1", "--end-to-end"],
        &["sweep", "--f", "exp", "--n", "2", "--a", "0", "--b", "1", "--theta-grid", "0:0:1"],
        &["sweep", "--f", "exp", "--n", "2", "--a", "0", "--b", "1", "--theta-grid", "0:0.5:2"],
    ] {
        let out = run(args);
        assert_eq!(out.code, EXIT_VALIDATION, "{args:?}: {}", out.stderr);
    }
}

#[test]
fn non_convergence_exits_three() {
    let out = run(&["integrate", "--f", "sin:1000000", "--n", "2", "--theta", "0", "--a", "0", "--b", "100"]);
    assert_eq!(out.code, EXIT_CONVERGENCE, "{}", out.stderr);
}

#[test]
fn oracle_tolerance_from_environment() {
    let args = ["thetaquad", "integrate", "--f", "runge", "--n", "2", "--theta", "0", "--a", "-1", "--b", "2"];
    let loose = run_with_env(args, Some("1e-3"));
    assert_eq!(loose.code, EXIT_OK);
    let bad = run_with_env(args, Some("-1"));
    assert_eq!(bad.code, EXIT_VALIDATION);
    let bad = run_with_env(args, Some("abc"));
    assert_eq!(bad.code, EXIT_VALIDATION);
}

#[test]
fn perturbed_certificates_switch_the_rule() {
    let v = json(&["integrate", "--f", "exp", "--n", "2", "--rule", "midpoint", "--a", "0", "--b", "1", "--bound", "sharp", "--panels", "4"]);
    assert_eq!(v["results"]["perturbed"], true);
    assert!(result(&v, "true_error") <= result(&v, "bound"));
    let out = run(&["integrate", "--f", "exp", "--n", "2", "--rule", "midpoint", "--a", "0", "--b", "1", "--bound", "l2", "--perturbed"]);
    assert_eq!(out.code, EXIT_VALIDATION);
}

#[test]
fn integrate_csv_has_one_row() {
    let out = run(&["integrate", "--f", "runge", "--n", "3", "--theta", "0.5", "--a", "-1", "--b", "2", "--panels", "3", "--bound", "band", "--format", "csv"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("value,exact,true_error"));
    let per_panel = lines[1].split(',').last().unwrap();
    assert_eq!(per_panel.split(';').count(), 3);
}

#[test]
fn sweep_json_matches_csv() {
    let base = ["sweep", "--f", "poly:1,0,-2,0.5", "--n", "3", "--a", "-1", "--b", "2", "--theta-grid", "0:0.5:1"];
    let csv_out = run(&base);
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let v = json(&json_args);
    let rows = v["results"]["rows"].as_array().unwrap();
    let mut reader = csv::Reader::from_reader(csv_out.stdout.as_bytes());
    let header = reader.headers().unwrap().clone();
    for (rec, row) in reader.records().zip(rows) {
        let rec = rec.unwrap();
        for (k, cell) in header.iter().zip(rec.iter()) {
            assert_eq!(row[k].as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn sweep_has_header_and_one_row_per_grid_point(steps in 1usize..12, n in 1usize..=6, which in 0usize..4) {
        let f = ["exp", "sin:3", "runge", "poly:1,2,-3,0.5"][which];
        let step = 1.0 / steps as f64;
        let grid = format!("0:{step}:1");
        let n_s = n.to_string();
        let out = run(&["sweep", "--f", f, "--n", &n_s, "--a", "-1", "--b", "2", "--theta-grid", &grid]);
        prop_assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
        let lines: Vec<&str> = out.stdout.lines().collect();
        prop_assert!(lines[0].starts_with("theta,f_n,true_error"));
        prop_assert_eq!(lines.len(), steps + 2);
        let width = lines[0].split(',').count();
        for line in &lines[1..] {
            prop_assert_eq!(line.split(',').count(), width);
        }
    }

    #[test]
    fn identical_arguments_give_identical_output(theta in 0.0f64..=1.0, n in 1usize..=6, panels in 1usize..20) {
        let (t, n_s, p) = (theta.to_string(), n.to_string(), panels.to_string());
        let args = ["integrate", "--f", "runge", "--n", &n_s, "--theta", &t, "--a", "-1", "--b", "2", "--panels", &p, "--bound", "linf"];
        let first = run(&args);
        prop_assert_eq!(first.code, EXIT_OK);
        prop_assert_eq!(&first, &run(&args));
    }

    #[test]
    fn kernel_output_round_trips(theta in 0.0f64..=1.0, n in 1usize..=8) {
        let (t, n_s) = (theta.to_string(), n.to_string());
        let v = json(&["kernel", "--n", &n_s, "--theta", &t, "--a", "0", "--b", "1"]);
        let stats = kernel_stats_closed(&RuleSpec::new(theta, n, 0.0, 1.0).unwrap());
        prop_assert_eq!(result(&v, "max_abs").to_bits(), stats.max_abs.to_bits());
        prop_assert_eq!(v["inputs"]["theta"].as_f64().unwrap().to_bits(), theta.to_bits());
    }
}
