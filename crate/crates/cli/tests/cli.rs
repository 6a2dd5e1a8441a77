use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtf-spectra"))
        .args(args)
        .env_remove("MTF_SPECTRA_THREADS")
        .output()
        .expect("binary runs")
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

#[test]
fn spectrum_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = run(&["spectrum", "--scenario", "teflon-lf", "--nmax", "150", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,eig_index,re,im,dist_to_accum"));
    assert_eq!(lines.count(), 1200);
    let summary = json(&o.stdout);
    assert_eq!(summary["rows"], 1200);
    assert_eq!(summary["accumulation"]["points"].as_array().unwrap().len(), 6);
    assert!(summary["final_hausdorff"].as_f64().unwrap() < 1e-2);
    let side = json(&fs::read(dir.path().join("s.csv.summary.json")).unwrap());
    assert_eq!(side, summary);
}

#[test]
fn spectrum_scaled_divides_by_sqrt_two() {
    let plain = run(&["spectrum", "--scenario", "teflon-lf", "--nmax", "5"]);
    let scaled = run(&["spectrum", "--scenario", "teflon-lf", "--nmax", "5", "--scaled"]);
    let first = |o: &Output| -> f64 {
        let text = String::from_utf8(o.stdout.clone()).unwrap();
        text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!((first(&plain) * std::f64::consts::FRAC_1_SQRT_2 - first(&scaled)).abs() < 1e-14);
}

#[test]
fn spectrum_bmtf_has_two_points() {
    let o = run(&["spectrum", "--scenario", "ferrite-hf", "--variant", "bmtf", "--nmax", "20"]);
    assert!(o.status.success());
    let summary = json(&o.stderr);
    assert_eq!(summary["accumulation"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn spectrum_json_format() {
    let o = run(&["spectrum", "--scenario", "ferrite-lf", "--nmax", "3", "--format", "json"]);
    assert!(o.status.success());
    let rows = json(&o.stdout);
    assert_eq!(rows.as_array().unwrap().len(), 24);
    assert!(rows[0]["re"].is_number());
}

#[test]
fn accum_point_counts() {
    let count = |scenario: &str, variant: &str| {
        let o = run(&["accum", "--scenario", scenario, "--variant", variant]);
        assert!(o.status.success());
        json(&o.stdout)["points"].as_array().unwrap().len()
    };
    assert_eq!(count("teflon-lf", "mtf"), 6);
    assert_eq!(count("ferrite-lf", "mtf"), 8);
    assert_eq!(count("teflon-lf", "bmtf"), 2);
}

#[test]
fn accum_bmtf_teflon_values() {
    let o = run(&["accum", "--scenario", "teflon-hf", "--variant", "bmtf"]);
    let v = json(&o.stdout);
    let mut re: Vec<f64> = v["points"].as_array().unwrap().iter().map(|p| p["re"].as_f64().unwrap()).collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] - 4.0).abs() < 1e-12);
    assert!((re[1] - 4.576190).abs() < 1e-6, "{re:?}");
}

#[test]
fn gmres_four_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(&["gmres", "--scenario", "teflon-lf", "--tol", "1e-6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("variant,iteration,relative_residual\n"));
    let summary = json(&o.stdout);
    assert_eq!(summary["tol"].as_f64(), Some(1e-6));
    assert_eq!(summary["seed"], 42);
    let variants = summary["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 4);
    let rows = text.lines().count() - 1;
    let expected: u64 = variants.iter().map(|v| v["iterations"].as_u64().unwrap() + 1).sum();
    assert_eq!(rows as u64, expected);
    for tag in ["mtf", "mtf2", "bmtf", "stf2"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{tag},0,1"))), "{tag}");
    }
}

#[test]
fn gmres_equal_media_bmtf_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let custom = dir.path().join("equal.txt");
    fs::write(&custom, "# equal media\neps0=1\nmu0=1\neps1=1\nmu1=1\nkappa0=2\nkappa1=2\n").unwrap();
    let o = run(&["gmres", "--custom", custom.to_str().unwrap(), "--variant", "bmtf", "--nmax", "20"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert_eq!(json(&o.stderr)["variants"][0]["iterations"], 1);
}

#[test]
fn gmres_stall_exits_four() {
    let o = run(&["gmres", "--scenario", "ferrite-hf", "--variant", "mtf", "--max-iter", "5"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!o.stdout.is_empty());
}

#[test]
fn coercivity_positive() {
    for scenario in ["teflon-lf", "ferrite-lf"] {
        let o = run(&["coercivity", "--scenario", scenario, "--nmax", "500"]);
        assert!(o.status.success());
        let text = String::from_utf8(o.stdout).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,quotient_exact,quotient_asymptotic"));
        let asym: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
        assert_eq!(asym.len(), 500);
        assert!(asym.iter().all(|&q| q > 0.0), "{scenario}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["spectrum"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--scenario", "water-lf"]).status.code(), Some(1));
    assert_eq!(run(&["coercivity", "--scenario", "teflon-lf", "--nmax", "0"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--scenario", "teflon-lf", "--variant", "xyz"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let o = run(&["spectrum", "--scenario", "water-lf"]);
    assert!(String::from_utf8(o.stderr).unwrap().contains("teflon-lf"));
}

#[test]
fn io_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope").join("s.csv");
    let o = run(&["spectrum", "--scenario", "teflon-lf", "--nmax", "3", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["spectrum", "--custom", dir.path().join("absent.txt").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    let o = run(&["selftest", "--json"]);
    assert_eq!(json(&o.stdout)["passed"], true);
}

#[test]
fn selftest_detects_fault() {
    let o = run(&["selftest", "--inject-fault", "k_symbol_sign"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("calderon"));
    assert_eq!(run(&["selftest", "--inject-fault", "bogus"]).status.code(), Some(1));
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_mtf-spectra"))
        .args(["accum", "--scenario", "teflon-lf"])
        .env("MTF_SPECTRA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
