//! End-to-end tests of the command-line binary: exit codes, determinism,
//! provenance headers, config-file precedence, and the cross-engine
//! agreement the trajectory exporter promises.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kit() -> Command {
    Command::new(env!("CARGO_BIN_EXE_josephson-kit"))
}

fn run(args: &[&str]) -> Output {
    kit().args(args).output().expect("binary runs")
}

fn assert_exit(output: &Output, code: i32, context: &str) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "{context}: expected exit {code}, got {:?}\nstdout: {}\nstderr: {}",
        output.status.code(),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
}

/// Parses a provenance-headed CSV into (provenance line, column names, rows).
fn read_csv(path: &Path) -> (String, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).expect("artifact exists");
    let mut lines = text.lines();
    let provenance = lines.next().expect("provenance line").to_string();
    let columns: Vec<String> = lines
        .next()
        .expect("column line")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect();
    (provenance, columns, rows)
}

fn column(rows: &[Vec<String>], columns: &[String], name: &str) -> Vec<f64> {
    let index = columns
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("column {name} exists"));
    rows.iter()
        .map(|row| row[index].parse().expect("numeric cell"))
        .collect()
}

#[test]
fn limits_output_is_deterministic_and_provenance_headed() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    for out in [&first, &second] {
        let output = run(&[
            "limits",
            "--deltaE-over-hbar",
            "1000",
            "--convention",
            "angular",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_exit(&output, 0, "limits");
    }
    let bytes_first = fs::read(first.join("limits.csv")).unwrap();
    let bytes_second = fs::read(second.join("limits.csv")).unwrap();
    assert_eq!(bytes_first, bytes_second, "identical config, identical bytes");

    let (provenance, columns, rows) = read_csv(&first.join("limits.csv"));
    assert!(provenance.starts_with("# {\"tool\":\"josephson-kit\""));
    assert!(provenance.contains("config_sha256"));
    assert_eq!(columns[0], "label");
    assert_eq!(rows.len(), 12, "twelve scenario rows");
    let min_f = column(&rows, &columns, "min_f");
    let max_imbalance = column(&rows, &columns, "max_imbalance");
    // The coldest, smallest source sits in the last block's first row.
    assert!((max_imbalance[9] - 0.0187).abs() < 5e-4);
    assert!((min_f[9] - 0.9998).abs() < 1e-4);
}

#[test]
fn config_file_matches_flags_and_flags_override_the_file() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"limits": {"deltaE_over_hbar": 500.0, "v": 0.0}}"#,
    )
    .unwrap();

    let from_flags = dir.path().join("flags");
    let from_file = dir.path().join("file");
    let overridden = dir.path().join("override");
    assert_exit(
        &run(&[
            "limits",
            "--deltaE-over-hbar",
            "500",
            "--out",
            from_flags.to_str().unwrap(),
        ]),
        0,
        "flags run",
    );
    assert_exit(
        &run(&[
            "limits",
            "--config",
            config.to_str().unwrap(),
            "--out",
            from_file.to_str().unwrap(),
        ]),
        0,
        "config run",
    );
    assert_exit(
        &run(&[
            "limits",
            "--config",
            config.to_str().unwrap(),
            "--deltaE-over-hbar",
            "1000",
            "--out",
            overridden.to_str().unwrap(),
        ]),
        0,
        "override run",
    );

    let flags_bytes = fs::read(from_flags.join("limits.csv")).unwrap();
    let file_bytes = fs::read(from_file.join("limits.csv")).unwrap();
    let override_bytes = fs::read(overridden.join("limits.csv")).unwrap();
    assert_eq!(
        flags_bytes, file_bytes,
        "the file route resolves to the same artifact as the flag route"
    );
    assert_ne!(
        flags_bytes, override_bytes,
        "a flag overrides the config-file value"
    );
}

#[test]
fn pure_state_trajectories_agree_across_engines() {
    let dir = TempDir::new().unwrap();
    let shared = [
        "--f",
        "1",
        "--z0",
        "0.2",
        "--theta0",
        "0.3",
        "--v0",
        "0.1",
        "--periods",
        "5",
        "--samples",
        "200",
        "--out",
    ];
    let mut standard = vec!["simulate", "--engine", "standard", "--name", "std"];
    standard.extend_from_slice(&shared);
    standard.push(dir.path().to_str().unwrap());
    assert_exit(&run(&standard), 0, "standard engine");

    let mut generalized = vec!["simulate", "--engine", "generalized", "--name", "gen"];
    generalized.extend_from_slice(&shared);
    generalized.push(dir.path().to_str().unwrap());
    assert_exit(&run(&generalized), 0, "generalized engine");

    let (_, columns_std, rows_std) = read_csv(&dir.path().join("std.csv"));
    let (_, columns_gen, rows_gen) = read_csv(&dir.path().join("gen.csv"));
    let z_std = column(&rows_std, &columns_std, "Z");
    let z_gen = column(&rows_gen, &columns_gen, "Z");
    assert_eq!(z_std.len(), 201);
    let worst = z_std
        .iter()
        .zip(&z_gen)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(worst <= 1e-8, "engines disagree by {worst:.2e}");

    // The sidecar records the conserved coherence and the drift diagnostics.
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("gen.json")).unwrap()).unwrap();
    assert_eq!(sidecar["conserved_f"].as_f64(), Some(1.0));
    assert!(sidecar["integrator"]["f_drift_per_period"].as_f64().unwrap() < 1e-9);
    assert_eq!(sidecar["config"]["engine"], "generalized");
}

#[test]
fn thermal_sweep_is_monotone_between_its_limits() {
    let dir = TempDir::new().unwrap();
    let output = run(&[
        "thermal",
        "--N",
        "100",
        "--x-range",
        "0.001:10",
        "--points",
        "40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "thermal");
    let (_, columns, rows) = read_csv(&dir.path().join("thermal.csv"));
    assert_eq!(rows.len(), 40);
    let coherence = column(&rows, &columns, "coherence_fraction");
    assert!(coherence.windows(2).all(|w| w[1] >= w[0]), "monotone in x");
    assert!(coherence[0] < 0.05, "hot end approaches 0");
    assert!(coherence[39] > 0.99, "cold end approaches 1");
}

#[test]
fn isolines_emit_every_requested_contour() {
    let dir = TempDir::new().unwrap();
    let output = run(&[
        "isolines",
        "--f-values",
        "0.5,1.0",
        "--resolution",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "isolines");
    let (_, columns, rows) = read_csv(&dir.path().join("isolines.csv"));
    assert_eq!(rows.len(), 2 * 51, "two contours, 51 points each");
    let f = column(&rows, &columns, "f");
    let g = column(&rows, &columns, "dN01_over_N");
    let y = column(&rows, &columns, "dNLR_over_N");
    assert!(f.iter().take(51).all(|&v| v == 0.5));
    assert!(f.iter().skip(51).all(|&v| v == 1.0));
    // The untilted f = 1 contour is the unit quarter-circle.
    for (gi, yi) in g.iter().zip(&y).skip(51) {
        assert!((gi * gi + yi * yi - 1.0).abs() < 1e-12);
    }
}

#[test]
fn oracle_prints_the_report_it_writes() {
    let dir = TempDir::new().unwrap();
    let output = run(&[
        "oracle",
        "--N",
        "4",
        "--lift",
        "product",
        "--periods",
        "2",
        "--samples",
        "50",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "oracle");
    let stdout = String::from_utf8(output.stdout).unwrap();
    let report: serde_json::Value = serde_json::from_str(&stdout).expect("stdout is JSON");
    assert_eq!(report["pass"], true);
    assert!(report["max_residual_per_particle"].as_f64().unwrap() < 1e-8);
    let written = fs::read_to_string(dir.path().join("oracle.json")).unwrap();
    assert_eq!(stdout, written, "stdout and artifact are the same bytes");
}

#[test]
fn modes_reports_both_built_in_families() {
    // The default (gaussian) trap clears the grid-quality gate as-is.
    let dir = TempDir::new().unwrap();
    let output = run(&["modes", "--out", dir.path().to_str().unwrap()]);
    assert_exit(&output, 0, "default modes");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("modes.json")).unwrap()).unwrap();
    assert!(report["energies"]["delta_e"].as_f64().unwrap() > 0.0);
    assert!(report["sides"]["epsilon"].as_f64().unwrap() < 0.25);
    let two_mode = &report["two_mode"];
    assert_eq!(two_mode["v0"].as_f64(), Some(0.0), "untilted trap");
    assert!(two_mode["delta_e"].as_f64().unwrap() > 0.0);

    // The square barrier's jump discontinuities converge too slowly for the
    // quality gate at this resolution; the gate rejects it (exit 2) and the
    // explicit bypass produces the report.
    let square = dir.path().join("square");
    let gated = run(&[
        "modes",
        "--family",
        "square",
        "--out",
        square.to_str().unwrap(),
    ]);
    assert_exit(&gated, 2, "gated square modes");
    let bypassed = run(&[
        "modes",
        "--family",
        "square",
        "--unchecked",
        "--out",
        square.to_str().unwrap(),
    ]);
    assert_exit(&bypassed, 0, "unchecked square modes");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(square.join("modes.json")).unwrap()).unwrap();
    assert!(report["energies"]["delta_e"].as_f64().unwrap() > 0.0);
    assert!(report["sides"]["epsilon"].as_f64().unwrap() < 0.25);
}

#[test]
fn modes_accepts_potential_samples_from_a_csv_file() {
    let dir = TempDir::new().unwrap();
    let potential = dir.path().join("trap.csv");
    let n = 1601;
    let mut text = String::from("# mass=1 length_scale=1 energy_scale=1\nx,v\n");
    for i in 0..n {
        let x = -6.0 + 12.0 * i as f64 / (n - 1) as f64;
        let v = 0.5 * x * x + 5.0 * (-0.5 * x * x).exp();
        text.push_str(&format!("{x:.17e},{v:.17e}\n"));
    }
    fs::write(&potential, text).unwrap();
    let output = run(&[
        "modes",
        "--potential-file",
        potential.to_str().unwrap(),
        "--unchecked",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_exit(&output, 0, "modes from file");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("modes.json")).unwrap()).unwrap();
    assert_eq!(report["grid"]["n"].as_u64(), Some(n as u64));
    assert!(report["energies"]["delta_e"].as_f64().unwrap() > 0.0);
    assert!(report["config"]["potential_sha256"].is_string());
    assert!(report["sides"]["epsilon"].as_f64().unwrap() < 0.25);
}

#[test]
fn exit_codes_separate_config_from_physics_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();

    // Unknown flags are configuration errors.
    assert_exit(&run(&["limits", "--no-such-flag"]), 1, "unknown flag");
    // So are malformed values and broken config files.
    assert_exit(
        &run(&["thermal", "--x-range", "banana", "--out", out]),
        1,
        "malformed range",
    );
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "not json").unwrap();
    assert_exit(
        &run(&["limits", "--config", broken.to_str().unwrap(), "--out", out]),
        1,
        "broken config file",
    );
    let misspelled = dir.path().join("misspelled.json");
    fs::write(&misspelled, r#"{"limits": {"delta_e": 1000.0}}"#).unwrap();
    assert_exit(
        &run(&[
            "limits",
            "--config",
            misspelled.to_str().unwrap(),
            "--out",
            out,
        ]),
        1,
        "unknown config key",
    );

    // Physically inadmissible requests exit 2.
    assert_exit(
        &run(&["simulate", "--z0", "1.5", "--out", out]),
        2,
        "impossible imbalance",
    );
    assert_exit(
        &run(&["simulate", "--engine", "standard", "--f", "0.7", "--out", out]),
        2,
        "fragmented state on the pure-state engine",
    );
    assert_exit(
        &run(&["isolines", "--v", "0.9", "--out", out]),
        2,
        "tilt outside the first-order window",
    );
    assert_exit(
        &run(&["limits", "--deltaE-over-hbar", "-5", "--out", out]),
        2,
        "negative splitting",
    );

    // --help and --version are not errors.
    assert_exit(&run(&["--help"]), 0, "help");
    assert_exit(&run(&["--version"]), 0, "version");
}

#[test]
fn thread_cap_env_var_is_validated() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let ok = kit()
        .args(["thermal", "--points", "8", "--out", out])
        .env("JOSEPHSON_KIT_THREADS", "2")
        .output()
        .unwrap();
    assert_exit(&ok, 0, "numeric thread cap");
    let bad = kit()
        .args(["thermal", "--points", "8", "--out", out])
        .env("JOSEPHSON_KIT_THREADS", "zebra")
        .output()
        .unwrap();
    assert_exit(&bad, 1, "non-numeric thread cap");
}

#[test]
fn reproduce_exit_code_matches_its_summary() {
    let dir = TempDir::new().unwrap();
    let output = run(&["reproduce", "--out", dir.path().to_str().unwrap()]);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("reproduce.json")).unwrap())
            .unwrap();
    let failed = summary["failed"].as_u64().unwrap();
    let expected = if failed == 0 { 0 } else { 3 };
    assert_exit(&output, expected, "reproduce");
    assert_eq!(summary["checks"].as_array().unwrap().len(), 10);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]")).count(),
        10,
        "one verdict line per check"
    );
}
