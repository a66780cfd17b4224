//! End-to-end checks of the `chua` binary: exit codes, file outputs,
//! determinism, and configuration echo round-trips.

use std::path::Path;
use std::process::{Command, Output};

fn chua(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chua"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_metric(output: &Output, key: &str) -> f64 {
    let text = String::from_utf8_lossy(&output.stdout);
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix(&format!("{key} = ")) {
            return rest.parse().unwrap();
        }
    }
    panic!("metric {key} not found in:\n{text}");
}

#[test]
fn invalid_r0_fails_validation_without_partial_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(
        &[
            "simulate", "--out", "results", "--r0", "0", "--t-end", "0.01",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(
        !dir.path().join("results").exists(),
        "no output directory on validation failure"
    );
}

#[test]
fn simulate_writes_expected_files_and_settles_at_2200() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(
        &[
            "simulate", "--out", "res", "--r0", "2200", "--t-end", "0.05",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    for name in ["trajectory.csv", "phase.csv", "config.echo.toml"] {
        assert!(dir.path().join("res").join(name).exists(), "{name} missing");
    }
    let text = std::fs::read_to_string(dir.path().join("res/trajectory.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let parse = |row: &str| -> Vec<f64> { row.split(',').map(|c| c.parse().unwrap()).collect() };
    let last = parse(rows[rows.len() - 1]);
    // Terminal rows constant within 1e-3 V: settled at an equilibrium.
    for row in &rows[rows.len() - 20..] {
        let cols = parse(row);
        assert!((cols[1] - last[1]).abs() < 1e-3);
        assert!((cols[2] - last[2]).abs() < 1e-3);
    }
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("r0_ohm = 2200"));
}

#[test]
fn simulate_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = chua(
            &["simulate", "--out", name, "--r0", "1800", "--t-end", "0.02"],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a/trajectory.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/trajectory.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = chua(
        &[
            "sound",
            "--out",
            "one",
            "--mod",
            "sine",
            "--center",
            "1830",
            "--depth",
            "120",
            "--freq",
            "100",
            "--duration",
            "0.12",
        ],
        dir.path(),
    );
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    let echo = dir.path().join("one/config.echo.toml");
    let second = chua(
        &["sound", "--out", "two", "--config", echo.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(second.status.code(), Some(0), "{second:?}");
    let a = std::fs::read(dir.path().join("one/sound.wav")).unwrap();
    let b = std::fs::read(dir.path().join("two/sound.wav")).unwrap();
    assert_eq!(a, b, "echoed config must reproduce the WAV bit-exactly");
}

#[test]
fn sweep_range_produces_descending_rows() {
    let dir = tempfile::tempdir().unwrap();
    // A light analysis window keeps this a format test, not a physics test.
    std::fs::write(
        dir.path().join("cfg.toml"),
        "[analysis]\n\
         transient = 0.02\n\
         window = 0.05\n\
         lyapunov_transient = 0.02\n\
         lyapunov_total_time = 0.1\n",
    )
    .unwrap();
    let out = chua(
        &[
            "sweep",
            "--out",
            "res",
            "--config",
            "cfg.toml",
            "--r0-range",
            "2000:1800:5",
            "--workers",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(dir.path().join("res/regimes.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 41, "header plus 41 rows");
    let mut previous = f64::INFINITY;
    for row in &rows[1..] {
        let r0: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert!(r0 < previous, "r0 column must descend strictly");
        previous = r0;
    }
    assert!(dir.path().join("res/bifurcation.csv").exists());
}

#[test]
fn sweep_single_value_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(&["sweep", "--out", "res", "--r0-list", "2200"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(dir.path().join("res/regimes.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("equilibrium"));
}

#[test]
fn sync_mismatch_flags_reproduce_reference_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let matched = chua(&["sync", "--out", "m", "--mismatch", "none"], dir.path());
    assert_eq!(matched.status.code(), Some(0));
    assert!(stdout_metric(&matched, "rms_post_over_signal") < 1e-3);

    let c5 = chua(&["sync", "--out", "c", "--mismatch", "c=5%"], dir.path());
    assert_eq!(c5.status.code(), Some(0));
    assert!(stdout_metric(&c5, "rms_post_over_signal") < 0.1);

    let r5 = chua(&["sync", "--out", "r", "--mismatch", "r0=5%"], dir.path());
    assert_eq!(r5.status.code(), Some(0));
    assert!(stdout_metric(&r5, "rms_post_over_signal") > 0.3);

    assert!(dir.path().join("m/sync.csv").exists());
    let header = std::fs::read_to_string(dir.path().join("m/sync.csv")).unwrap();
    assert!(header.starts_with("t,v_y_master,v_y_slave,difference\n"));
}

#[test]
fn comm_zero_message_recovers_silence() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(&["comm", "--out", "res", "--tone-ratio", "0"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(stdout_metric(&out, "recovered_rms_over_carrier") < 1e-3);
    for name in ["channel.csv", "recovered.csv"] {
        assert!(dir.path().join("res").join(name).exists());
    }
    let rec = std::fs::read_to_string(dir.path().join("res/recovered.csv")).unwrap();
    assert!(rec.starts_with("t,original,recovered\n"));
}

#[test]
fn comm_tone_correlates_and_mismatched_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let good = chua(
        &[
            "comm",
            "--out",
            "good",
            "--tone-freq",
            "500",
            "--tone-ratio",
            "0.02",
        ],
        dir.path(),
    );
    assert_eq!(good.status.code(), Some(0), "{good:?}");
    assert!(stdout_metric(&good, "correlation") > 0.9);

    let bad = chua(
        &[
            "comm",
            "--out",
            "bad",
            "--tone-freq",
            "500",
            "--tone-ratio",
            "0.02",
            "--mismatch",
            "r0=5%",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(0), "{bad:?}");
    assert!(stdout_metric(&bad, "correlation") < 0.5);
}

#[test]
fn comm_message_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    // A slow two-segment ramp as the message: t,value rows.
    let mut csv = String::from("t,value\n");
    for i in 0..=40 {
        let t = i as f64 * 0.005;
        let v = 0.02 * (2.0 * std::f64::consts::PI * 300.0 * t).sin();
        csv += &format!("{t},{v}\n");
    }
    std::fs::write(dir.path().join("msg.csv"), csv).unwrap();
    let out = chua(
        &["comm", "--out", "res", "--message-file", "msg.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn sound_staircase_and_sine_produce_playable_wavs() {
    let dir = tempfile::tempdir().unwrap();
    let stair = chua(
        &[
            "sound",
            "--out",
            "st",
            "--mod",
            "staircase",
            "--freq",
            "100",
            "--duration",
            "0.2",
        ],
        dir.path(),
    );
    assert_eq!(stair.status.code(), Some(0), "{stair:?}");
    let bytes = std::fs::read(dir.path().join("st/sound.wav")).unwrap();
    assert_eq!(&bytes[0..4], b"RIFF");
    assert_eq!(&bytes[8..12], b"WAVE");
    assert!(bytes.len() > 44);

    let sine = chua(
        &[
            "sound",
            "--out",
            "si",
            "--mod",
            "sine",
            "--freq",
            "100",
            "--duration",
            "0.2",
            "--dump-csv",
        ],
        dir.path(),
    );
    assert_eq!(sine.status.code(), Some(0), "{sine:?}");
    assert!(dir.path().join("si/sound.wav").exists());
    assert!(dir.path().join("si/samples.csv").exists());
}

#[test]
fn sound_equilibrium_regime_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(
        &[
            "sound",
            "--out",
            "res",
            "--mod",
            "sine",
            "--center",
            "2200",
            "--depth",
            "0",
            "--duration",
            "0.3",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(!dir.path().join("res/sound.wav").exists());
}

#[test]
fn sound_rate_above_recording_rate_is_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(
        &[
            "sound",
            "--out",
            "res",
            "--rate",
            "2000000",
            "--duration",
            "0.05",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
}

#[test]
fn unknown_config_key_is_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "circuit.resistance = 7\n").unwrap();
    let out = chua(
        &["simulate", "--out", "res", "--config", "bad.toml"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(!dir.path().join("res").exists());
}

#[test]
fn usage_error_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = chua(&["sweep", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
