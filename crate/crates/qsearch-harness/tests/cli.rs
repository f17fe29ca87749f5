//! End-to-end tests of the `qsearch` binary: flag handling, config-file
//! layering, output formats, and exit codes.

use std::path::Path;
use std::process::Command;

fn qsearch() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsearch"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_writes_csv_with_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let status = qsearch()
        .args(["simulate", "--n", "3", "--m", "1", "--trials", "5", "--seed", "9"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = read(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("schema_version,trial,mode,engine,n,m,set_val,seed"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn json_output_parses() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.json");
    let status = qsearch()
        .args(["baseline", "--n", "4", "--m", "1", "--trials", "20", "--format", "json"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert_eq!(rows[0]["algorithm"], "canonical");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "n=3\nm=1\ntrials=4\nseed=5\nmode=physical\n").unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    // config alone
    let status = qsearch()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out_a)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(read(&out_a).contains(",physical,"));
    // flag overrides the file's mode
    let status = qsearch()
        .arg("simulate")
        .arg("--config")
        .arg(&config)
        .args(["--mode", "idealized"])
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(read(&out_b).contains(",idealized,"));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["audit", "--p", "0.75", "--trials", "5"],
        vec!["simulate", "--trials", "5"],                  // no instance given
        vec!["simulate", "--n", "3", "--mode", "quantum"],  // bad mode
        vec!["scaling", "--n-list", "100"],                 // not a power of two
    ] {
        let status = qsearch().args(&args).output().unwrap().status;
        assert_eq!(status.code(), Some(2), "args: {args:?}");
    }
    // clap's own rejection of unknown flags also uses exit code 2
    let status = qsearch().args(["simulate", "--bogus"]).output().unwrap().status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unwritable_output_path_exits_3() {
    let status = qsearch()
        .args(["simulate", "--n", "3", "--m", "1", "--trials", "2"])
        .args(["--out", "/nonexistent-dir/rows.csv"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(3));
}

#[test]
fn missing_config_file_exits_3() {
    let status = qsearch()
        .args(["simulate", "--config", "/nonexistent-dir/run.conf"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(3));
}
