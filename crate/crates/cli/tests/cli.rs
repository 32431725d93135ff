//! End-to-end tests of the `eigs` binary: exit codes, golden reports,
//! file outputs, and the verify pipeline, all through the real CLI.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn eigs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = eigs(args);
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        String::from_utf8(out.stderr).expect("stderr is UTF-8"),
    )
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_every_example() {
    for name in [
        "dhl-classical.json",
        "dhl-broken.json",
        "dhl-splendor.json",
        "binary-tree.json",
    ] {
        let (code, stdout, _) = run(&["validate", &fixture(name)]);
        assert_eq!(code, 0, "{name}");
        assert!(stdout.starts_with("ok:"), "{name}: {stdout}");
    }
}

#[test]
fn validate_rejects_disconnected_rule() {
    let (code, stdout, _) = run(&["validate", &fixture("dhl-disconnected.json")]);
    assert_eq!(code, 1);
    assert!(stdout.contains("not connected"), "{stdout}");
}

#[test]
fn malformed_json_is_a_parse_failure() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").expect("write");
    let (code, _, stderr) = run(&["validate", path.to_str().expect("utf-8")]);
    assert_eq!(code, 2);
    assert!(stderr.contains("error:"), "{stderr}");
}

#[test]
fn missing_file_is_a_parse_failure() {
    let (code, _, stderr) = run(&["validate", "/nonexistent/system.json"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("cannot read"), "{stderr}");
}

/// The committed reports for the three worked examples are a contract:
/// any byte of drift in the analysis output fails here.
#[test]
fn analyze_reports_match_goldens() {
    for name in ["dhl-classical", "dhl-broken", "dhl-splendor"] {
        let (code, stdout, _) = run(&["analyze", &fixture(&format!("{name}.json"))]);
        assert_eq!(code, 0, "{name}");
        let expected =
            std::fs::read_to_string(golden(&format!("{name}-report.json"))).expect("golden");
        assert_eq!(stdout, expected, "{name} report drifted from the golden");
    }
}

#[test]
fn analyze_writes_matrix_dumps() {
    let dir = tempfile::tempdir().expect("tempdir");
    let dir_arg = dir.path().to_str().expect("utf-8");
    let (code, _, _) = run(&[
        "analyze",
        &fixture("dhl-broken.json"),
        "--matrices",
        dir_arg,
        "--out",
        dir.path().join("report.json").to_str().expect("utf-8"),
    ]);
    assert_eq!(code, 0);
    let mass = std::fs::read_to_string(dir.path().join("mass.txt")).expect("mass dump");
    assert_eq!(mass, "3 1\n0 2\n");
    let incidence = std::fs::read_to_string(dir.path().join("incidence.txt")).expect("incidence");
    assert_eq!(incidence, "2 0 0 0\n0 1 0 1\n0 0 1 0\n0 0 0 1\n");
}

#[test]
fn generate_writes_edge_list_and_sidecar() {
    let dir = tempfile::tempdir().expect("tempdir");
    let prefix = dir.path().join("splendor2");
    let (code, stdout, _) = run(&[
        "generate",
        &fixture("dhl-splendor.json"),
        "-n",
        "2",
        "--out",
        prefix.to_str().expect("utf-8"),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("17 edges"), "{stdout}");

    let edges = std::fs::read_to_string(prefix.with_extension("edges")).expect("edges");
    let lines: Vec<&str> = edges.lines().collect();
    assert_eq!(lines.len(), 17);
    for line in &lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 3, "edge line `{line}`");
        for f in fields {
            f.parse::<u64>().expect("integer field");
        }
    }

    let vertices = std::fs::read_to_string(prefix.with_extension("vertices")).expect("sidecar");
    assert!(vertices.lines().count() > 2);
    for line in vertices.lines() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 4, "vertex line `{line}`");
    }
}

#[test]
fn generate_refuses_oversized_generations() {
    let (code, _, stderr) = run(&["generate", &fixture("dhl-splendor.json"), "-n", "20"]);
    assert_eq!(code, 4);
    assert!(stderr.contains("edges"), "{stderr}");
}

#[test]
fn simulate_bounded_degrees_is_not_applicable() {
    let (code, stdout, _) = run(&["simulate", &fixture("binary-tree.json"), "-n", "8"]);
    assert_eq!(code, 5);
    assert!(stdout.contains("not applicable"), "{stdout}");
}

#[test]
fn simulate_writes_levels_fits_and_plot() {
    let dir = tempfile::tempdir().expect("tempdir");
    let dir_arg = dir.path().to_str().expect("utf-8");
    let (code, stdout, _) = run(&[
        "simulate",
        &fixture("dhl-broken.json"),
        "-n",
        "11",
        "--plots",
        dir_arg,
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("class0: slope"), "{stdout}");

    let levels =
        std::fs::read_to_string(dir.path().join("dhl-broken-n11-levels.csv")).expect("levels");
    assert!(
        levels.starts_with("branch,neg_log_l,log_count\n"),
        "{levels}"
    );
    assert!(levels.lines().count() > 1);

    let fits = std::fs::read_to_string(dir.path().join("dhl-broken-n11-fits.csv")).expect("fits");
    let mut rows = fits.lines();
    assert_eq!(
        rows.next(),
        Some("branch,levels_total,levels_used,slope,intercept,r_squared,sparse")
    );
    let data: Vec<&str> = rows.next().expect("one fitted branch").split(',').collect();
    let slope: f64 = data[3].parse().expect("numeric slope");
    assert!(
        (slope - 1.63).abs() < 0.10,
        "broken slope at n=11 out of range: {slope}"
    );

    let svg = std::fs::read_to_string(dir.path().join("dhl-broken-n11.svg")).expect("plot");
    assert!(svg.starts_with("<svg"), "standalone vector file");
    assert!(svg.contains("<!-- data: branch,degree,count,attributed,neg_log_l,log_count,used_in_fit -->"));
    assert!(svg.contains("slopes shown positive"), "sign convention note");
}

#[test]
fn simulate_report_carries_the_empirical_section() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("report.json");
    let (code, _, _) = run(&[
        "simulate",
        &fixture("dhl-splendor.json"),
        "-n",
        "9",
        "--out",
        out.to_str().expect("utf-8"),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).expect("report")).expect("valid JSON");
    let empirical = &report["empirical"];
    assert_eq!(empirical["generation"], 9);
    assert_eq!(empirical["fits"].as_array().expect("fits").len(), 2);
    assert!(empirical["levels"].as_array().expect("levels").len() > 5);
    // Two mass blocks (radii 5 and 4) mix in the edge series, so the head
    // fit at n=9 still carries a (4/5)^n transient of roughly ten percent.
    let rel_gap = empirical["edge_fit"]["rel_gap"].as_f64().expect("gap");
    assert!(rel_gap < 0.15, "edge growth fit far from mass radius: {rel_gap}");
    let rate = empirical["edge_fit"]["rate"].as_f64().expect("rate");
    assert!(rate > 4.0 && rate < 5.5, "implausible edge growth rate: {rate}");
}

#[test]
fn verify_passes_on_the_examples_and_random_systems() {
    let (code, stdout, _) = run(&[
        "verify",
        &fixture("binary-tree.json"),
        &fixture("dhl-classical.json"),
        &fixture("dhl-broken.json"),
        &fixture("dhl-splendor.json"),
        "--random",
        "3",
        "--n-max",
        "4",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("ok: 7 systems verified"), "{stdout}");
    assert!(!stdout.contains("FAIL"), "{stdout}");
    assert!(!stdout.contains("skipped"), "{stdout}");
}

#[test]
fn verify_rejects_an_invalid_system() {
    let (code, stdout, _) = run(&["verify", &fixture("dhl-disconnected.json")]);
    assert_eq!(code, 1);
    assert!(stdout.contains("FAIL invalid system"), "{stdout}");
}
