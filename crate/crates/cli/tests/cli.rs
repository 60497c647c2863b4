use std::path::Path;
use std::process::{Command, Output};

fn gaze_lds(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaze-lds"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn simulate_train_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&gaze_lds(d, &["simulate", "--sigma", "0.2", "--pages", "1", "--seed", "1000", "--out", "pages"]));
    assert!(d.join("pages/page_000.csv").exists());
    ok(&gaze_lds(d, &["train", "--sigma", "0.2", "--out", "m.txt"]));
    ok(&gaze_lds(d, &["evaluate", "--model", "m.txt", "pages/page_000.csv", "--out", "report"]));
    let report = std::fs::read_to_string(d.join("report/report.csv")).unwrap();
    let hmm_row = report.lines().find(|l| l.starts_with("hmm,")).expect("hmm row");
    let e_p: f64 = hmm_row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(e_p <= 0.5, "e_p = {e_p}");
}

#[test]
fn decode_writes_one_line_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&gaze_lds(d, &["simulate", "--sigma", "0.3", "--pages", "1", "--lines", "5", "--out", "pages"]));
    ok(&gaze_lds(d, &["train", "--sigma", "0.3", "--lines", "5", "--pages", "5", "--out", "m.txt"]));
    let stdout = ok(&gaze_lds(d, &["decode", "--model", "m.txt", "--input", "pages/page_000.csv"]));
    let rows: Vec<&str> = stdout.lines().collect();
    assert_eq!(rows[0], "t,line");
    assert_eq!(rows.len() - 1, 5 * 60);
    assert!(rows[1..].iter().all(|r| {
        let line: usize = r.split(',').nth(1).unwrap().parse().unwrap();
        (1..=5).contains(&line)
    }));
}

#[test]
fn decode_with_mismatched_line_count_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&gaze_lds(d, &["simulate", "--pages", "1", "--out", "pages"]));
    ok(&gaze_lds(d, &["train", "--lines", "10", "--pages", "4", "--out", "m.txt"]));
    let out = gaze_lds(d, &["decode", "--model", "m.txt", "--input", "pages/page_000.csv", "--lines", "25"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside 1..=10"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gaze_lds(d, &["--help"]).status.code(), Some(0));
    assert_eq!(gaze_lds(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(gaze_lds(d, &["simulate", "--out", "x", "--bogus"]).status.code(), Some(1));
    assert_eq!(gaze_lds(d, &["simulate", "--out", "x", "--sigma", "-1"]).status.code(), Some(1));
    std::fs::write(d.join("bad.toml"), "[sim]\nsigmaa = 1\n").unwrap();
    assert_eq!(gaze_lds(d, &["--config", "bad.toml", "simulate", "--out", "x"]).status.code(), Some(1));
    assert_eq!(gaze_lds(d, &["estimate-region", "--input", "missing.csv"]).status.code(), Some(2));
    std::fs::write(d.join("bad.csv"), "t,x,y\n0,1,2\n0.1,abc,2\n").unwrap();
    let out = gaze_lds(d, &["estimate-region", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn impossible_observations_exit_numeric() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Line 2 cannot be reached or emitted: any observation of it has zero likelihood.
    std::fs::write(
        d.join("m.txt"),
        "region 0 2 0 1 2\n2\n1 0\n1 0\n0 1\n1 0\n0 1\n",
    )
    .unwrap();
    std::fs::write(d.join("p.csv"), "t,x,y\n0,0.5,0.5\n0.1,0.5,1.5\n").unwrap();
    assert_eq!(gaze_lds(d, &["decode", "--model", "m.txt", "--input", "p.csv"]).status.code(), Some(3));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), "seed = 4\n[sim]\nn_lines = 3\nsigma = 0.1\nrepetition = \"random\"\n").unwrap();
    ok(&gaze_lds(d, &["--config", "c.toml", "simulate", "--pages", "2", "--out", "a"]));
    ok(&gaze_lds(d, &["--config", "c.toml", "simulate", "--pages", "2", "--seed", "4", "--out", "b"]));
    ok(&gaze_lds(d, &["--config", "c.toml", "simulate", "--pages", "2", "--seed", "5", "--out", "c"]));
    let read = |p: &str| std::fs::read(d.join(p)).unwrap();
    assert_eq!(read("a/page_001.csv"), read("b/page_001.csv"));
    assert_ne!(read("a/page_001.csv"), read("c/page_001.csv"));
    let labels: Vec<usize> = String::from_utf8(read("a/page_000.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(*labels.iter().max().unwrap(), 3);
    let out = ok(&gaze_lds(d, &["--config", "c.toml", "estimate-region", "--input", "a/page_000.csv"]));
    assert!(out.starts_with("region "));
    assert!(out.lines().next().unwrap().ends_with(" 3"));
}

#[test]
fn tables_for_a_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("c.toml"),
        "[sim]\nn_lines = 5\n[experiment]\ntrain_pages = 4\ntest_pages = 2\nnoise_levels = [0.5, 0.2]\n",
    )
    .unwrap();
    ok(&gaze_lds(d, &["--config", "c.toml", "tables", "--seed", "3", "--out", "res"]));
    let summary = std::fs::read_to_string(d.join("res/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    assert!(summary.starts_with("scenario,sigma,e_avg,"));
    let table = std::fs::read_to_string(d.join("res/random_repeat/0.5/table.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 2);
}
