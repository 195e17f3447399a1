//! End-to-end tests of the `polarsim` binary: determinism, config
//! precedence, diagnostics, and exit codes.

use std::process::{Command, Output};

fn polarsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> Vec<u8> {
    let out = polarsim(args);
    assert!(
        out.status.success(),
        "polarsim {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

/// Extracts the data rows (non-`#` lines) of a CSV report.
fn data_rows(csv: &[u8]) -> Vec<String> {
    String::from_utf8(csv.to_vec())
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["epr", "--n", "20000", "--seed", "7"];
    assert_eq!(stdout_of(&args), stdout_of(&args));

    let args = ["sweep", "--model", "both", "--alpha", "0:90:15"];
    assert_eq!(stdout_of(&args), stdout_of(&args));
}

#[test]
fn thread_count_does_not_change_output() {
    let one = stdout_of(&["epr", "--n", "20000", "--threads", "1"]);
    let four = stdout_of(&["epr", "--n", "20000", "--threads", "4"]);
    // `threads` is part of the embedded config header, so compare rows.
    assert_eq!(data_rows(&one), data_rows(&four));
    assert!(!data_rows(&one).is_empty());

    let one = stdout_of(&["sweep", "--alpha", "0:90:10", "--threads", "1"]);
    let four = stdout_of(&["sweep", "--alpha", "0:90:10", "--threads", "4"]);
    assert_eq!(data_rows(&one), data_rows(&four));
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = std::env::temp_dir().join("polarsim-test-precedence");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "epsilon = 0.01\nseed = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    // File overrides the default epsilon (0.02).
    let out = stdout_of(&["transmit", "--config", cfg, "--grid", "90:90:1"]);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("# epsilon = 0.01\n"), "{text}");
    assert!(text.contains("# seed = 3\n"), "{text}");
    assert_eq!(data_rows(text.as_bytes()), vec!["90,0.01"]);

    // Flag overrides the file.
    let out = stdout_of(&[
        "transmit", "--config", cfg, "--epsilon", "0.05", "--grid", "90:90:1",
    ]);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("# epsilon = 0.05\n"), "{text}");
    assert_eq!(data_rows(text.as_bytes()), vec!["90,0.05"]);
}

#[test]
fn embedded_config_reproduces_the_run() {
    let first = stdout_of(&["epr", "--n", "20000", "--seed", "11"]);
    let text = String::from_utf8(first.clone()).unwrap();
    // Re-feed the `# key = value` header lines as a config file.
    let replay: String = text
        .lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.contains('=') && !l.starts_with("columns"))
        .map(|l| format!("{l}\n"))
        .collect();
    let dir = std::env::temp_dir().join("polarsim-test-replay");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("replay.cfg");
    std::fs::write(&cfg, replay).unwrap();
    let second = stdout_of(&["epr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(first, second);
}

#[test]
fn unknown_flag_exits_2() {
    let out = polarsim(&["transmit", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let dir = std::env::temp_dir().join("polarsim-test-badkey");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "epsilom = 0.02\n").unwrap();
    let out = polarsim(&["transmit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("epsilom"), "{err}");
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn out_of_range_value_exits_2_and_names_key() {
    let out = polarsim(&["transmit", "--epsilon", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("epsilon"), "{err}");

    let out = polarsim(&["bell", "--dim", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bell.dim"), "{err}");
}

#[test]
fn unwritable_output_path_exits_2_with_diagnostic() {
    let out = polarsim(&[
        "transmit",
        "--grid",
        "0:1:1",
        "--out",
        "/no-such-dir/report.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/no-such-dir/report.csv"), "{err}");
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = std::env::temp_dir().join("polarsim-test-out");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.csv");
    let path_str = path.to_str().unwrap();
    let streamed = stdout_of(&["cascade"]);
    let out = polarsim(&["cascade", "--out", path_str]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    // The header embeds output.path, so compare data rows.
    let written = std::fs::read(&path).unwrap();
    assert_eq!(data_rows(&streamed), data_rows(&written));
}

#[test]
fn json_and_csv_carry_the_same_rows() {
    let csv = stdout_of(&["cascade", "--format", "csv"]);
    let json = stdout_of(&["cascade", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let csv_rows = data_rows(&csv);
    assert_eq!(rows.len(), csv_rows.len());
    for (row, csv_row) in rows.iter().zip(&csv_rows) {
        let p = row["p"].as_str().unwrap();
        assert!(csv_row.ends_with(p), "{csv_row} vs {p}");
    }
}

#[test]
fn bell_header_reports_reference_values() {
    let out = stdout_of(&["bell", "--scenario", "classical"]);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("# classical_max = 2\n"), "{text}");
    assert!(
        text.contains("# chsh_correlation_value = 2.82842712475\n"),
        "{text}"
    );
    assert_eq!(data_rows(text.as_bytes()), vec!["classical,4,2,64,0"]);
}
