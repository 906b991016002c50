use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn domains() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../domains")
}

fn baac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baac")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn guitar_run_writes_a_checkable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("g.trace");
    let fixture = dir.path().join("g.fixture");
    let settings = domains().join("guitar/settings.txt");
    let o = baac(&["run", path(&settings), "--trace-out", path(&trace), "--fixture-out", path(&fixture)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("guitar_maker: success"));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("HORIZON\t22\n"));
    assert!(text.contains("\nSTATE-DIFF\tguitars\t9\t10\n"));

    let o = baac(&["check", path(&fixture)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("valid\n"));
}

#[test]
fn goal_failure_exits_one() {
    let settings = domains().join("guitar/settings.txt");
    let o = baac(&["run", path(&settings), "--horizon", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("guitar_maker: failure"));
}

#[test]
fn horizon_zero_with_goals_met() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.baac"), "agent a. fluent f valued 0..1. goal f = 0.").unwrap();
    std::fs::write(dir.path().join("s.txt"), "horizon = 0\ntheory = a.baac\n").unwrap();
    let trace = dir.path().join("t.trace");
    let o = baac(&["run", path(&dir.path().join("s.txt")), "--trace-out", path(&trace)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(!text.contains("STEP"));
    let o = baac(&["render", path(&trace)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "");
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = baac(&["run", path(&dir.path().join("missing.txt"))]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("a.baac"), "agent a. fluent f valued 0..1. initially f = 0.").unwrap();
    std::fs::write(dir.path().join("b.baac"), "agent b. fluent f valued 0..1. initially f = 1.").unwrap();
    std::fs::write(dir.path().join("s.txt"), "horizon = 1\ntheory = a.baac\ntheory = b.baac\n").unwrap();
    let o = baac(&["run", path(&dir.path().join("s.txt"))]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.baac"), "agent a. fluent f valued 0..1 goal").unwrap();
    std::fs::write(dir.path().join("s.txt"), "horizon = 1\ntheory = bad.baac\n").unwrap();
    let o = baac(&["run", path(&dir.path().join("s.txt"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.baac"));
}

#[test]
fn check_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.baac"), "agent a. fluent f valued 0..2. action up. executable up if f < 2. up causes f = f@-1 + 1.").unwrap();
    std::fs::write(
        dir.path().join("x.fixture"),
        "THEORY a.baac\nHORIZON 1\nSTEP 0 | ACTIONS - | STATE f=0\nSTEP 1 | ACTIONS a:up | STATE f=2\n",
    )
    .unwrap();
    let o = baac(&["check", path(&dir.path().join("x.fixture"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stdout(&o).contains("valid"));
}

#[test]
fn rally_fixture_renders_ten_frames() {
    let d = domains().join("volley2v2");
    let o = baac(&["check", path(&d.join("rally.fixture"))]);
    assert_eq!(o.status.code(), Some(0));
    let o = baac(&["render", path(&d.join("rally.fixture")), "--settings", path(&d.join("settings.txt"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out, std::fs::read_to_string(d.join("rally.frames")).unwrap());
    let frames: Vec<&str> = out.split("\n\n").collect();
    assert_eq!(frames.len(), 10);
    for f in frames {
        let rows: Vec<&str> = f.trim_end().lines().skip(1).collect();
        assert_eq!(rows.len(), 7);
        assert!(rows.iter().all(|r| r.chars().count() == 13));
    }
}

#[test]
fn deterministic_traces_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let settings = domains().join("conflict/settings.txt");
    let mut texts = Vec::new();
    for (i, mode) in ["negotiate", "negotiate"].iter().enumerate() {
        let out = dir.path().join(format!("{i}.trace"));
        baac(&["run", path(&settings), "--mode", mode, "--deterministic", "--trace-out", path(&out)]);
        texts.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}
