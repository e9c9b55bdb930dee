use std::process::Command;

fn sparsense() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsense"))
}

const TINY: &str = r#"
name = "tiny"
trials = 2
seed = 3

[signal]
len = 32
sines = 2
snr_db = 30.0

[sensing]
measurements = 16
passes = 10
sweep = [8, 16]

[[algorithm]]
label = "HARD-4"
variant = "hard"
mu = 1.0
sparsity = 4
burn_in = 16
"#;

#[test]
fn list_shows_every_preset() {
    let out = sparsense().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["exp1", "exp2", "exp3", "exp-msweep", "exp4-tracking"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from:\n{text}");
    }
    let show = sparsense().args(["list", "--show", "exp1"]).output().unwrap();
    assert!(String::from_utf8(show.stdout).unwrap().contains("name = \"exp1\""));
}

#[test]
fn run_config_file_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let out_dir = dir.path().join("out");
    let status = sparsense()
        .args(["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--gnuplot", "--trials", "3"])
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["tiny-M8.csv", "tiny-M8.dat", "tiny-M16.csv", "tiny-M16.dat", "tiny-summary.csv"] {
        assert!(out_dir.join(name).exists(), "{name} not written");
    }
    let curves = std::fs::read_to_string(out_dir.join("tiny-M16.csv")).unwrap();
    let mut lines = curves.lines();
    assert_eq!(lines.next(), Some("experiment,label,iteration,rmse_db,s_est_mean"));
    // 10 passes of 16 samples
    assert_eq!(lines.count(), 160);
    let summary = std::fs::read_to_string(out_dir.join("tiny-summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.lines().nth(1).unwrap().starts_with("tiny,HARD-4,8,3,"));
}

#[test]
fn scaled_preset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = sparsense()
        .args(["run", "exp1", "--scale", "200", "--seed", "9", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curves = std::fs::read_to_string(dir.path().join("exp1.csv")).unwrap();
    // M scales to 60, ten passes
    assert_eq!(curves.lines().count(), 1 + 2 * 600);
}

#[test]
fn bad_inputs_fail_cleanly() {
    let out = sparsense().args(["run", "no-such-experiment"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("neither a preset"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, TINY.replace("mu = 1.0", "mu = 3.0")).unwrap();
    let out = sparsense().args(["run", cfg.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn verify_and_oracle_commands_pass() {
    let out = sparsense().args(["verify", "--draws", "2000", "--seed", "4"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);

    let out = sparsense().arg("oracle").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
