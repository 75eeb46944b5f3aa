//! End-to-end tests of the command-line binary: exit-code contract,
//! output formats, and error reporting.
//!
//! Exit codes: 0 success/converges, 1 diverges, 2 input or resource
//! errors, 3 unsupported request.

use std::path::PathBuf;
use std::process::Command;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Runs the binary and returns (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_aperiodiq"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf-8 stdout"),
        String::from_utf8(out.stderr).expect("utf-8 stderr"),
    )
}

fn table() -> String {
    data("table-tiling.sub").to_string_lossy().into_owned()
}

fn fibonacci() -> String {
    data("fibonacci-block.sub").to_string_lossy().into_owned()
}

fn heisenberg() -> String {
    data("heisenberg.sub").to_string_lossy().into_owned()
}

#[test]
fn check_converging_seed_exits_zero_with_certificate_json() {
    let (code, stdout, stderr) = run(&["check", &table(), "rb"]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(doc["format"], 1);
    assert_eq!(doc["command"], "check");
    assert_eq!(doc["seed"], "rb");
    assert_eq!(doc["certificate"]["verdict"], "Converges");
    assert_eq!(doc["testing_domain_size"], 4);
    assert!(stderr.contains("converges"));
}

#[test]
fn check_diverging_seed_exits_one_with_closed_path_witness() {
    let (code, stdout, stderr) = run(&["check", &table(), "const:red"]);
    assert_eq!(code, 1);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(doc["certificate"]["verdict"], "Diverges");
    let cycle = doc["certificate"]["witness_cycle"]
        .as_array()
        .expect("witness cycle present");
    assert!(cycle.len() >= 2);
    assert_eq!(cycle.first(), cycle.last(), "the witness path is closed");
    assert!(stderr.contains("diverges"));
}

#[test]
fn check_missing_file_exits_two() {
    let (code, _, stderr) = run(&["check", "/nonexistent/nothing.sub", "rb"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error"));
}

#[test]
fn check_unknown_seed_exits_two() {
    let (code, _, stderr) = run(&["check", &table(), "nosuchseed"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("nosuchseed"));
}

#[test]
fn check_malformed_file_reports_the_line_number() {
    let dir = std::env::temp_dir().join("aperiodiq-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.sub");
    std::fs::write(&path, "format 1\n[lattice]\nkind zd\nfactors 2 2\nlambda0 3\n").unwrap();
    let (code, _, stderr) = run(&["check", path.to_str().unwrap(), "const:a"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("line 5"), "stderr: {stderr}");
}

#[test]
fn reduce_confirms_the_unit_box_on_the_block_lattice() {
    let (code, stdout, _) = run(&["reduce", &table()]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(doc["sizes"], serde_json::json!([4]));
    assert_eq!(doc["final_domain"].as_array().unwrap().len(), 4);
}

#[test]
fn reduce_with_unreachable_size_cap_exits_two() {
    let (code, _, stderr) = run(&["reduce", &table(), "--max-size", "2"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("no verified domain"), "stderr: {stderr}");
}

#[test]
fn rate_prints_the_decay_table_and_the_fitted_slope() {
    let (code, stdout, _) = run(&["rate", &fibonacci(), "ab", "--nmax", "5", "--rmax", "16"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("n,r_star,delta,bound_C_over_lambda_n"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert!(stdout.contains("# fitted_slope"), "stdout: {stdout}");
    // the doubling rule halves the dictionary distance each step
    let slope_line = stdout.lines().find(|l| l.starts_with("# fitted_slope")).unwrap();
    let slope: f64 = slope_line.split_whitespace().nth(2).unwrap().parse().unwrap();
    let expected = -(2.0f64).ln();
    assert!(
        (slope - expected).abs() <= 0.15 * expected.abs(),
        "slope {slope} vs {expected}"
    );
}

#[test]
fn rate_on_a_diverging_seed_exits_one() {
    let (code, stdout, stderr) = run(&["rate", &table(), "const:red"]);
    assert_eq!(code, 1);
    let doc: serde_json::Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(doc["command"], "rate");
    assert_eq!(doc["certificate"]["verdict"], "Diverges");
    assert!(stderr.contains("no rate to fit"));
}

#[test]
fn rate_on_the_heisenberg_lattice_exits_three() {
    let (code, _, stderr) = run(&["rate", &heisenberg(), "const:a"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("unsupported"), "stderr: {stderr}");
}

#[test]
fn spectrum_single_step_prints_bands() {
    let (code, stdout, stderr) = run(&["spectrum", &table(), "rb", "--n", "1", "--grid", "8"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("band_lo,band_hi"));
    let mut last_hi = f64::NEG_INFINITY;
    let mut bands = 0;
    for line in lines {
        let parts: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(parts.len(), 2);
        assert!(parts[0] <= parts[1], "band ordered");
        assert!(parts[0] > last_hi, "bands disjoint and sorted");
        last_hi = parts[1];
        bands += 1;
    }
    assert!(bands >= 1);
    let doc: serde_json::Value = serde_json::from_str(&stderr).expect("stderr is JSON");
    assert_eq!(doc["step"], 1);
    assert!(doc["error_radius"].as_f64().unwrap() > 0.0);
}

#[test]
fn spectrum_range_prints_the_gap_table() {
    let (code, stdout, stderr) =
        run(&["spectrum", &fibonacci(), "ab", "--n", "0..3", "--grid", "16"]);
    assert_eq!(code, 0);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("n,gap,error_radius,bound_C_over_lambda_n"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3, "gap rows for n = 0, 1, 2");
    for row in rows {
        let parts: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        assert_eq!(parts.len(), 4);
        assert!(parts[1].is_finite() && parts[1] >= 0.0, "gap finite");
    }
    let doc: serde_json::Value = serde_json::from_str(&stderr).expect("stderr is JSON");
    assert!(doc["rows"].as_array().unwrap().len() == 3);
}

#[test]
fn spectrum_witness_operator_runs_on_block_lattices() {
    let (code, stdout, _) = run(&[
        "spectrum",
        &fibonacci(),
        "ab",
        "--n",
        "2",
        "--grid",
        "16",
        "--operator",
        "witness",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("band_lo,band_hi"));
}

#[test]
fn spectrum_unknown_operator_exits_two() {
    let (code, _, stderr) = run(&["spectrum", &table(), "rb", "--operator", "hamburger"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("hamburger"));
}

#[test]
fn spectrum_on_the_heisenberg_lattice_exits_three() {
    let (code, _, stderr) = run(&["spectrum", &heisenberg(), "const:a"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("block lattices"), "stderr: {stderr}");
}

#[test]
fn spectrum_rejects_an_empty_step_range() {
    let (code, _, stderr) = run(&["spectrum", &table(), "rb", "--n", "4..2"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("empty step range"), "stderr: {stderr}");
}
