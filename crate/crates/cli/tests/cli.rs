use std::path::PathBuf;
use std::process::{Command, Output};

fn seqsteer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqsteer")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(line: &str, i: usize) -> &str {
    line.split(',').nth(i).unwrap()
}

#[test]
fn runs_a_bundled_scenario_as_json() {
    let o = seqsteer(&["run", "diagonal_two_bobs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"scenario\"") && out.contains("\"cffw\""), "{out}");
}

#[test]
fn runs_a_scenario_file_as_csv() {
    let o = seqsteer(&["run", "--config", &config("two_bobs.toml"), "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("bob,lambda,inequality,value,bound,violated"));
    let cffw: Vec<&str> = lines.filter(|l| field(l, 2) == "cffw").collect();
    assert_eq!(cffw.len(), 2);
    let s1: f64 = field(cffw[0], 3).parse().unwrap();
    assert!((s1 - 2.0 * 2f64.sqrt() * 0.74).abs() < 1e-12);
}

#[test]
fn writes_to_the_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = seqsteer(&["run", "sharp_singlet_chsh", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    assert!(std::fs::read_to_string(out).unwrap().starts_with("bob,lambda"));
}

#[test]
fn bad_config_reports_the_line_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[alice]\nsettings = [[0.0, 0.0],\n").unwrap();
    let o = seqsteer(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    std::fs::write(&path, std::fs::read_to_string(config("two_bobs.toml")).unwrap().replace("0.74", "1.5")).unwrap();
    let o = seqsteer(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bobs[0].lambda"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(seqsteer(&["run"]).status.code(), Some(2));
    assert_eq!(seqsteer(&["run", "no_such_experiment"]).status.code(), Some(2));
    assert_eq!(seqsteer(&["optimize"]).status.code(), Some(2));
    assert_eq!(seqsteer(&["--budget", "0,10", "list"]).status.code(), Some(2));
    assert_eq!(seqsteer(&["verify", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn verify_passes_with_few_trials() {
    let o = seqsteer(&["verify", "--trials", "20", "--format", "csv"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("property,observed,threshold,passed\n"));
    assert!(out.lines().skip(1).all(|l| l.ends_with(",true")), "{out}");
}

#[test]
fn optimize_reaches_the_two_bob_value() {
    let o = seqsteer(&["optimize", "--config", &config("cffw_two_bobs.toml"), "--format", "csv", "--budget", "8,2000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    let s1: f64 = field(rows[0], 2).parse().unwrap();
    let s2: f64 = field(rows[1], 2).parse().unwrap();
    assert!((s1 - 2.10).abs() < 1e-4, "{out}");
    assert!((s2 - 2.36).abs() < 0.01, "{out}");
}

#[test]
fn optimize_output_is_reproducible() {
    let args = ["optimize", "--config", &config("cffw_two_bobs.toml"), "--budget", "4,500", "--seed", "7"];
    let a = seqsteer(&args);
    let b = seqsteer(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn infeasible_targets_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.toml");
    let src = std::fs::read_to_string(config("cffw_two_bobs.toml")).unwrap().replace("target = 2.10", "target = 2.9");
    std::fs::write(&path, src).unwrap();
    let o = seqsteer(&["optimize", "--config", path.to_str().unwrap(), "--budget", "4,500"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("infeasible"), "{}", stderr(&o));
}

#[test]
fn sweep_finds_the_window_edges() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    let src = std::fs::read_to_string(config("cffw_window.toml"))
        .unwrap()
        .replace("start = 0.70\nstop = 0.92", "start = 0.69\nstop = 0.73");
    std::fs::write(&path, src).unwrap();
    let o = seqsteer(&["sweep", "--config", path.to_str().unwrap(), "--format", "csv", "--budget", "8,2000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let flags: Vec<&str> = out.lines().skip(1).map(|l| field(l, 2)).collect();
    assert_eq!(flags, ["false", "false", "true", "true", "true"], "{out}");

    let o = seqsteer(&["sweep", "--config", &config("cffw_two_bobs.toml")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn distribution_lists_every_outcome() {
    let o = seqsteer(&["distribution", "--config", &config("two_bobs.toml"), "--alice", "1", "--bobs", "0,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("a,b1,b2,probability"));
    let total: f64 = lines.map(|l| field(l, 3).parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn conjecture_with_a_small_budget() {
    let o = seqsteer(&["conjecture", "--settings", "3", "--chain", "2", "--budget", "4,1000", "--format", "csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().count() >= 2);
}

#[test]
fn list_names_every_experiment() {
    let o = seqsteer(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().count() >= 10);
    assert!(out.contains("sharp_singlet_chsh\trun"));
    assert!(out.contains("property_suite\tverify"));
}
