use std::path::Path;
use std::process::{Command, Output};

fn sortenv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sortenv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(output: &Output) -> String {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    String::from_utf8(output.stdout.clone()).unwrap()
}

#[test]
fn simulate_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    ok(&sortenv(&["simulate", "--env", "advanced", "--input", "seasonal", "--out", "t.csv"], dir.path()));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 51);
    assert_eq!(lines[0], sortenv::bench::TRACE_HEADER);
}

#[test]
fn surface_lists_every_speed_and_occupancy() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&sortenv(&["surface"], dir.path()));
    assert!(out.starts_with("speed_index,speed,occupancy,limit,accuracy,reward"));
    assert_eq!(out.lines().count(), 1 + 10 * 101);
}

#[test]
fn small_benchmark_reports_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&sortenv(
        &["benchmark", "--seeds", "2", "--train-steps", "2000", "--setups", "AC", "--out", "b.csv"],
        dir.path(),
    ));
    assert!(out.contains("rba"), "{out}");
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    // 2 setups x 2 variants x 3 agents
    assert_eq!(csv.lines().count(), 1 + 12);
}

#[test]
fn train_then_simulate_with_saved_table() {
    let dir = tempfile::tempdir().unwrap();
    ok(&sortenv(&["train", "--train-steps", "5000", "--out", "q.txt"], dir.path()));
    ok(&sortenv(&["simulate", "--agent", "qtable", "--qtable", "q.txt", "--out", "t.csv"], dir.path()));
    assert!(dir.path().join("t.csv").exists());
    let mismatch = sortenv(
        &["simulate", "--env", "advanced", "--agent", "qtable", "--qtable", "q.txt", "--out", "u.csv"],
        dir.path(),
    );
    assert!(!mismatch.status.success());
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("env.toml"), "variant = \"advanced\"\nepisode_length = 20\n").unwrap();
    ok(&sortenv(&["--config", "env.toml", "simulate", "--out", "t.csv"], dir.path()));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 21);
    ok(&sortenv(&["--config", "env.toml", "--steps", "7", "simulate", "--out", "t.csv"], dir.path()));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 8);
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--env", "huge"][..],
        &["simulate", "--noise", "-0.5"],
        &["benchmark", "--setups", "AZ"],
        &["simulate", "--config", "missing.toml"],
        &["frobnicate"],
    ] {
        let out = sortenv(args, dir.path());
        assert!(!out.status.success(), "{args:?} succeeded");
    }
}
