use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_superstat"));
    c.env_remove("SUPERSTAT_ABS_TOL").env_remove("SUPERSTAT_REL_TOL").env_remove("SUPERSTAT_MAX_SUBDIVISIONS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn table(o: &Output) -> Vec<Vec<f64>> {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

const FIG1: [&str; 8] = ["--family", "cutoff_superstat_gamma", "--a", "0.904", "--b", "0.571", "--beta0", "0.0252"];

/// Price series whose one-minute log-returns are `scale` times model draws.
fn synthetic_prices(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let draws = dir.join(format!("draws-{seed}.csv"));
    let mut args = vec!["sample"];
    args.extend(FIG1);
    let (n_s, seed_s) = (n.to_string(), seed.to_string());
    args.extend(["-n", &n_s, "--seed", &seed_s, "-o", draws.to_str().unwrap()]);
    assert_eq!(code(&run(&args)), 0);
    let text = std::fs::read_to_string(&draws).unwrap();
    let mut body = String::from("timestamp,price\n");
    let mut log_price = 100f64.ln();
    body.push_str(&format!("0,{}\n", log_price.exp()));
    for (i, line) in text.lines().skip(1).enumerate() {
        log_price += 1e-3 * line.parse::<f64>().unwrap();
        body.push_str(&format!("{},{:?}\n", 60 * (i + 1), log_price.exp()));
    }
    let path = dir.join(format!("prices-{seed}.csv"));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn sample_header_only_and_bad_params() {
    let o = run(&["sample", "--family", "gaussian", "--beta0", "0.5", "-n", "0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(o.stdout, b"x\n");
    assert_eq!(code(&run(&["sample", "--family", "superstat_gamma", "--a", "-1", "--b", "1", "-n", "3"])), 2);
    assert_eq!(code(&run(&["sample", "--family", "superstat_gamma", "--a", "1", "-n", "3"])), 2);
}

#[test]
fn sample_is_deterministic_per_seed() {
    let mut args = vec!["sample"];
    args.extend(FIG1);
    args.extend(["-n", "1000", "--seed", "5"]);
    let first = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, run(&args).stdout);
    assert_eq!(first.stdout.iter().filter(|&&c| c == b'\n').count(), 1001);
    let last = args.len() - 1;
    args[last] = "6";
    assert_ne!(first.stdout, run(&args).stdout);
}

#[test]
fn pdf_tables() {
    let o = run(&["pdf", "--family", "gaussian", "--beta0", "0.5", "--x-min", "-5", "--x-max", "5", "--n-points", "101"]);
    assert_eq!(code(&o), 0);
    let rows = table(&o);
    assert_eq!(rows.len(), 101);
    for i in 0..101 {
        assert_eq!(rows[i][1], rows[100 - i][1]);
    }

    let mut args = vec!["pdf"];
    args.extend(FIG1);
    args.extend(["--x-min", "-20", "--x-max", "20", "--n-points", "8001"]);
    let rows = table(&run(&args));
    assert!(rows.iter().all(|r| r[1].is_finite() && r[1] > 0.0));
    let h = rows[1][0] - rows[0][0];
    let trapezoid: f64 = rows.windows(2).map(|w| 0.5 * h * (w[0][1] + w[1][1])).sum();
    assert!((trapezoid - 1.0).abs() < 1e-4, "{trapezoid}");

    let base = ["pdf", "--family", "gaussian", "--beta0", "0.5"];
    let bad = |extra: &[&str]| code(&run(&[&base[..], extra].concat()));
    assert_eq!(bad(&["--x-min", "1", "--x-max", "-1"]), 2);
    assert_eq!(bad(&["--x-min", "-1", "--x-max", "1", "--n-points", "1"]), 2);
}

#[test]
fn fit_recovers_shape_from_prices() {
    let dir = tempfile::tempdir().unwrap();
    let prices = synthetic_prices(dir.path(), 200_000, 11);
    let overlay = dir.path().join("overlay.csv");
    let o = run(&[
        "fit",
        prices.to_str().unwrap(),
        "--family",
        "cutoff_superstat_gamma",
        "--restarts",
        "2",
        "--overlay",
        overlay.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&o);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["restarts"], 2);
    let fit = &report["fits"][0];
    let a = fit["params"]["a"].as_f64().unwrap();
    assert!((a / 0.904 - 1.0).abs() < 0.15, "a = {a}");
    assert!(fit["converged"].as_bool().unwrap());

    let text = std::fs::read_to_string(&overlay).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "bin_center,empirical_pdf,count,cutoff_superstat_gamma_pdf");
    assert_eq!(lines.count(), 100);
}

#[test]
fn fit_all_ranks_three_families() {
    let dir = tempfile::tempdir().unwrap();
    let prices = synthetic_prices(dir.path(), 20_000, 2);
    let o = run(&["fit", prices.to_str().unwrap(), "--family", "all", "--restarts", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fits = json(&o)["fits"].as_array().unwrap().clone();
    assert_eq!(fits.len(), 3);
    let aic: Vec<f64> = fits.iter().map(|f| f["aic"].as_f64().unwrap()).collect();
    assert!(aic.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(fits[2]["family"], "gaussian");
}

#[test]
fn fit_returns_input_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["fit", dir.path().join("missing.csv").to_str().unwrap()])), 2);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "timestamp,price\n0,1\n60,-2\n120,3\n").unwrap();
    let o = run(&["fit", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let returns = dir.path().join("x.csv");
    let mut args = vec!["sample"];
    args.extend(FIG1);
    args.extend(["-n", "5000", "-o", returns.to_str().unwrap()]);
    assert_eq!(code(&run(&args)), 0);
    let ok = run(&["fit", returns.to_str().unwrap(), "--input-kind", "returns", "--family", "gaussian"]);
    assert_eq!(code(&ok), 0);
    assert!(json(&ok)["preprocessing"]["mean"].is_null());

    // A one-bisection budget at this tolerance cannot converge anywhere.
    let starved = run(&[
        "fit",
        returns.to_str().unwrap(),
        "--input-kind",
        "returns",
        "--family",
        "cutoff_superstat_gamma",
        "--restarts",
        "1",
        "--rel-tol",
        "1e-15",
        "--abs-tol",
        "1e-300",
        "--max-subdivisions",
        "1",
    ]);
    assert_eq!(code(&starved), 3, "{}", String::from_utf8_lossy(&starved.stderr));
}

fn price_spec(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("spec.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn price_reports() {
    let o = run(&["price"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["kernel_mode"], "numeric_quadrature");
    assert!(r["diagnostics"]["route_relative_difference"].as_f64().unwrap() < 1e-6);
    let phi = r["hedge_ratio"].as_f64().unwrap();
    assert!(phi > 0.0 && phi < 1.0);

    let dir = tempfile::tempdir().unwrap();
    let zero_strike = price_spec(
        dir.path(),
        r#"{"option": {"s0": 100, "strike": 0, "rate": 0.05, "maturity": 1, "y": 0.1},
            "model": {"mixing": {"family": "gamma", "a": 2, "b": 1}, "kernel_mode": "closed_form"}}"#,
    );
    let r = json(&run(&["price", "--spec", zero_strike.to_str().unwrap()]));
    let spot = 100.0 * 0.1f64.exp();
    assert!((r["price"].as_f64().unwrap() / spot - 1.0).abs() < 1e-9);

    let invalid = price_spec(
        dir.path(),
        r#"{"option": {"s0": -1, "strike": 100, "rate": 0.05, "maturity": 1},
            "model": {"mixing": {"family": "gamma", "a": 2, "b": 1}, "kernel_mode": "closed_form"}}"#,
    );
    assert_eq!(code(&run(&["price", "--spec", invalid.to_str().unwrap()])), 2);
    let closed_with_cutoff = price_spec(
        dir.path(),
        r#"{"option": {"s0": 100, "strike": 100, "rate": 0.05, "maturity": 1},
            "model": {"mixing": {"family": "gamma", "a": 2, "b": 1}, "cutoff": {"beta0": 1}, "kernel_mode": "closed_form"}}"#,
    );
    assert_eq!(code(&run(&["price", "--spec", closed_with_cutoff.to_str().unwrap()])), 2);
}

#[test]
fn price_near_point_mass() {
    // Gamma mixing with mean β* = 12.5 and relative spread 10⁻⁴.
    let dir = tempfile::tempdir().unwrap();
    let spec = price_spec(
        dir.path(),
        r#"{"option": {"s0": 100, "strike": 100, "rate": 0.05, "maturity": 1},
            "model": {"mixing": {"family": "gamma", "a": 1e8, "b": 8e6}, "kernel_mode": "numeric_quadrature"}}"#,
    );
    let o = run(&["price", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let price = json(&o)["price"].as_f64().unwrap();
    // Black–Scholes at σ = 0.2 with the strike scaled by e^(-s/(4β*)).
    let bs = 11.541_470_170_672_4;
    assert!((price / bs - 1.0).abs() < 1e-4, "{price}");
}

#[test]
fn price_verify_agrees_with_monte_carlo() {
    let o = run(&["price", "--verify", "--mc-paths", "1000000"]);
    assert_eq!(code(&o), 0);
    let v = &json(&o)["verification"];
    assert!(v["standard_errors"].as_f64().unwrap() < 3.0, "{v}");
    assert_eq!(v["mc"]["n_paths"], 1_000_000);
}

#[test]
fn verify_suite_and_perturbed_kernel() {
    let o = run(&["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = json(&o);
    assert!(r["passed"].as_bool().unwrap());
    assert_eq!(r["checks"].as_array().unwrap().len(), 9);

    let o = run(&["verify", "--suite", "kernel", "--perturb-kernel"]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], false, "{c}");
        assert!(c["measured"].as_f64().unwrap() > 5e-4);
    }
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 42, "quadrature": {"rel_tol": 1e-9}}"#).unwrap();
    let o = bin()
        .args(["price", "--config", cfg.to_str().unwrap()])
        .env("SUPERSTAT_ABS_TOL", "1e-11")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let c = &json(&o)["config"];
    assert_eq!(c["seed"], 42);
    assert_eq!(c["quadrature"]["rel_tol"], 1e-9);
    assert_eq!(c["quadrature"]["abs_tol"], 1e-11);

    std::fs::write(&cfg, "{not json").unwrap();
    assert_eq!(code(&run(&["price", "--config", cfg.to_str().unwrap()])), 2);
}
