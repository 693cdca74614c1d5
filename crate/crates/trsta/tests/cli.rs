//! End-to-end tests of the `trsta` binary: exit codes, file formats,
//! provenance headers, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn trsta(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trsta"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Data rows of a CSV file: skips `#` comments, returns (header, rows).
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).expect("csv exists");
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .expect("header row")
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse::<f64>().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&trsta(&["--help"], dir.path())), 0);
    assert_eq!(code(&trsta(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&trsta(&["simulate", "--steps", "abc"], dir.path())), 2);
    assert_eq!(code(&trsta(&["sweep", "--a", ""], dir.path())), 2);
    // one sweep, one error axis
    assert_eq!(
        code(&trsta(
            &["sweep", "--eps-range", "0:0.1:3", "--delta-range", "0:0.1:3"],
            dir.path()
        )),
        2
    );
}

#[test]
fn validate_default_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(&["validate", "--format", "csv"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("a = 2: PASS"), "{text}");
    assert!(text.contains("propagator equality"));
}

#[test]
fn validate_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = trsta(
        &["validate", "--a", "2,5", "--out", "report.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["command"], "validate");
    assert_eq!(report["pass"], true);
    assert_eq!(report["entries"].as_array().unwrap().len(), 2);
    assert_eq!(report["provenance"]["omega0"], 2.0);
}

#[test]
fn validate_flags_slow_rescaling() {
    let dir = tempfile::tempdir().unwrap();
    // a = 0.5 is a valid map that slows the protocol down; still exits 0
    let out = trsta(&["validate", "--a", "0.5", "--steps", "4000"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("slower"), "{}", stdout(&out));
}

#[test]
fn validate_fails_for_non_monotone_map() {
    let dir = tempfile::tempdir().unwrap();
    // a < 1/2 makes the remapped time non-monotone, so the compressed
    // evolution no longer reproduces the reference propagator
    let out = trsta(&["validate", "--a", "0.3", "--steps", "4000"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn simulate_reference_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(
        &["simulate", "--a", "1", "--steps", "4000", "--out", "ref.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let path = dir.path().join("ref.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# trsta simulate\n"), "provenance header first");
    assert!(text.contains("# omega0 = 2"));

    let (header, rows) = read_csv(&path);
    assert_eq!(
        header,
        ["time", "P1", "P2", "rabi", "detuning", "P1_ad", "P2_ad"]
    );
    assert_eq!(rows.len(), 4001);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows.last().unwrap()[0], 8.0);
    // the solved and adiabatic populations both end inverted
    let last = rows.last().unwrap();
    assert!(last[2] > 0.999, "final P2 = {}", last[2]);
    assert!(last[6] > 0.999, "final P2_ad = {}", last[6]);
    assert!(rows[0][1] > 0.999, "initial P1");
}

#[test]
fn simulate_compressed_windows_and_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(
        &["simulate", "--a", "2,10", "--steps", "2000", "--out", "traj.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);

    let (header, rows) = read_csv(&dir.path().join("traj_a2.csv"));
    assert_eq!(header, ["time", "P1", "P2", "rabi", "detuning"]);
    assert_eq!(rows.last().unwrap()[0], 4.0);

    let (_, rows10) = read_csv(&dir.path().join("traj_a10.csv"));
    assert_eq!(rows10.last().unwrap()[0], 0.8);
    let max_rabi = rows10.iter().map(|r| r[3]).fold(f64::NEG_INFINITY, f64::max);
    assert!((max_rabi - 38.0).abs() < 1e-9, "peak rabi {max_rabi}");
    assert!(rows10.last().unwrap()[2] > 0.999);
}

#[test]
fn simulate_output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    trsta(&["simulate", "--a", "2", "--steps", "1000", "--out", "x.csv"], dir.path());
    let first = std::fs::read(dir.path().join("x.csv")).unwrap();
    trsta(&["simulate", "--a", "2", "--steps", "1000", "--out", "x.csv"], dir.path());
    let second = std::fs::read(dir.path().join("x.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn sweep_rabi_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(&["sweep", "--out", "sweep.csv"], dir.path());
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(
        header,
        ["a", "error_kind", "error_value", "fidelity", "pi_pulse_fidelity"]
    );
    assert_eq!(rows.len(), 41 * 3);

    let min_f = rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    assert!(min_f >= 0.913, "min F = {min_f}");

    // pi-pulse column is the closed form
    for r in &rows {
        let expected = ((1.0 + r[2]) * std::f64::consts::PI / 2.0).sin().powi(2);
        assert!((r[4] - expected).abs() <= 1e-12);
    }
}

#[test]
fn sweep_detuning_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(
        &["sweep", "--delta-range", "-0.2:0.2:21", "--a", "2", "--out", "d.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&dir.path().join("d.csv"));
    assert_eq!(header, ["a", "error_kind", "error_value", "fidelity"]);
    assert_eq!(rows.len(), 21);
    let min_f = rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    assert!(min_f >= 0.986, "min F = {min_f}");
}

#[test]
fn sweep_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(
        &["sweep", "--eps-range", "-0.1:0.1:5", "--a", "2", "--steps", "2000", "--format", "json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["error_kind"], "rabi_error");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert!(v["rows"][0]["pi_pulse_fidelity"].is_f64());
}

#[test]
fn work_defaults_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(&["work", "--out", "work.json"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("work.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["rows"].as_array().unwrap().len(), 6); // 2 a's x 3 betas
    assert!(report["max_gap"].as_f64().unwrap() <= 1e-6);
    for row in report["rows"].as_array().unwrap() {
        assert!(row["mean_gap"].as_f64().unwrap() <= 1e-6);
        assert!(row["fluct_gap"].as_f64().unwrap() <= 1e-6);
    }

    // atoms table accompanies the report
    let (header, atom_rows) = read_csv(&dir.path().join("work_atoms.csv"));
    assert_eq!(
        header,
        ["protocol", "a", "beta", "from", "to", "work", "probability"]
    );
    // per beta: 4 reference atoms + 4 per contraction value
    assert_eq!(atom_rows.len(), 3 * (4 + 2 * 4));
}

#[test]
fn work_zero_temperature_and_identity_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = trsta(
        &["work", "--a", "1", "--beta-thermal", "0", "--steps", "2000"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &report["rows"][0];
    assert_eq!(row["mean_gap"], 0.0);
    assert_eq!(row["fluct_gap"], 0.0);
}

#[test]
fn work_fails_on_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    // 50 steps cannot hold the equality at 1e-6
    let out = trsta(&["work", "--steps", "50"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "omega0 = 2.0\nsteps = 1000\na = 2\nout = from_file.csv\n",
    )
    .unwrap();
    let out = trsta(
        &["simulate", "--config", "run.cfg", "--out", "cli_wins.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("cli_wins.csv").exists());
    assert!(!dir.path().join("from_file.csv").exists());

    std::fs::write(dir.path().join("bad.cfg"), "omega0 = banana\n").unwrap();
    let out = trsta(&["simulate", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&out), 2);
}
