use std::fs;
use std::path::Path;
use std::process::Command;

use rkb_bench::{read_csv, CSV_HEADER};

const SCENARIO: &str = "\
n_rx = 8
n_users = 2
n_interferers = 1
snr_db = 0:10:5
trials_per_point = 20
seed = 3
detectors = mmse-irc, kbest
";

fn simulate(dir: &Path, config: &str, extra: &[&str]) -> (std::process::Output, std::path::PathBuf) {
    let cfg = dir.join("scenario.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out.csv");
    let output = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (output, out)
}

#[test]
fn writes_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let plot = dir.path().join("plot.dat");
    let (output, csv) = simulate(dir.path(), SCENARIO, &["--plot", plot.to_str().unwrap()]);
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );

    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = read_csv(&text).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().all(|r| r.trials == 20 && r.seed == 3));

    let plot_text = fs::read_to_string(&plot).unwrap();
    assert_eq!(plot_text.matches("# detector").count(), 2);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let (output, csv) = simulate(
        dir.path(),
        SCENARIO,
        &["--seed", "9", "--detectors", "mrc", "--snr", "2:4:2"],
    );
    assert!(output.status.success());
    let records = read_csv(&fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records.iter().all(|r| r.seed == 9 && r.detector.name() == "mrc"));
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, first) = simulate(a.path(), SCENARIO, &[]);
    let (_, second) = simulate(b.path(), SCENARIO, &[]);
    assert_eq!(fs::read(first).unwrap(), fs::read(second).unwrap());
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (output, _) = simulate(dir.path(), "n_rx = 2\nn_users = 4\n", &[]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!output.stderr.is_empty());

    let (output, _) = simulate(dir.path(), "n_rx = sixteen\n", &[]);
    assert_eq!(output.status.code(), Some(1));

    let (output, _) = simulate(dir.path(), SCENARIO, &["--detectors", "zf"]);
    assert_eq!(output.status.code(), Some(1));

    let (output, _) = simulate(dir.path(), SCENARIO, &["--bogus"]);
    assert_eq!(output.status.code(), Some(1));
}
