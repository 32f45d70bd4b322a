use std::process::{Command, Output};

fn kai(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kai-esprit"))
        .args(args)
        .env_remove("KAI_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn preset_listing_and_text() {
    let out = kai(&["preset"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 4);
    let out = kai(&["preset", "fig4_correlated"]);
    assert!(stdout(&out).contains("correlation = \"strong\""));
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(kai(&["preset", "fig7"]).status.code(), Some(1));
    assert_eq!(kai(&["sweep"]).status.code(), Some(1));
    assert_eq!(kai(&["sweep", "--config", "/nonexistent/x.toml"]).status.code(), Some(1));
    assert_eq!(kai(&["complexity", "--m-range", "40"]).status.code(), Some(1));
    assert_eq!(kai(&["estimate", "--estimator", "capon"]).status.code(), Some(1));
    assert_eq!(kai(&["no-such-command"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "schema_version = 1\nsurprise = true\n").unwrap();
    let out = kai(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surprise"));
}

#[test]
fn help_exits_cleanly() {
    let out = kai(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verify-appendix"));
}

#[test]
fn estimate_prints_the_angles() {
    let out = kai(&["estimate", "--estimator", "esprit", "--snr", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("estimated:")).unwrap();
    let angles: Vec<f64> = line["estimated:".len()..]
        .split(',')
        .map(|a| a.trim().parse().unwrap())
        .collect();
    for (a, t) in angles.iter().zip([10.2, 12.6, 15.0, 17.4]) {
        assert!((a - t).abs() < 0.3, "{a} vs {t}");
    }
}

#[test]
fn complexity_flags_the_parity_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = kai(&["complexity", "--m-range", "38:42", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("nearest 1 at M ="));
    assert!(dir.path().join("complexity.csv").is_file());
    assert!(dir.path().join("complexity.svg").is_file());
}

#[test]
fn sweep_output_is_independent_of_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = Command::new(env!("CARGO_BIN_EXE_kai-esprit"))
            .args(["sweep", "--preset", "fig2_uncorrelated", "--trials", "3", "--out"])
            .arg(&out_dir)
            .env("KAI_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(out_dir.join("fig2_uncorrelated.csv")).unwrap()
    };
    assert_eq!(run("1", "a"), run("4", "b"));
}

#[test]
fn small_appendix_run_passes() {
    let out = kai(&["verify-appendix", "--trials", "50", "--draws", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}
