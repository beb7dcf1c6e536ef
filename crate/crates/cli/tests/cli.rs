use std::path::Path;
use std::process::{Command, Output};

fn ktriv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktriv"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const EXISTENCE: &str = "variant = existence\nus = solovay\nopponent = blind\nour_budget = 2\n\
                         opponent_budget = 1\nhorizon = 10000\nseed = 3\nslots = 200\n";

const LOWNESS: &str = "variant = lowness\nc = 1.9\nlabels = labels.txt\nus = lowness\nopponent = matcher\n\
                       route = 0000\nour_budget = 1\nopponent_budget = 4\nhorizon = 1000\n";

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exist.cfg"), EXISTENCE).unwrap();
    std::fs::write(dir.path().join("low.cfg"), LOWNESS).unwrap();
    std::fs::write(dir.path().join("labels.txt"), "0 1 1 2\n00 2 1 2\n").unwrap();
    dir
}

#[test]
fn existence_run_wins_and_verifies() {
    let dir = setup();
    let run = ktriv(&["run-game", "--config", "exist.cfg", "--out", "out"], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout(&run).contains("verdict ours"));
    let check = ktriv(
        &[
            "verify-trace",
            "out/exist.trace.jsonl",
            "--expect",
            "out/exist.audit.txt",
        ],
        dir.path(),
    );
    assert_eq!(check.status.code(), Some(0));
    let audit = std::fs::read_to_string(dir.path().join("out/exist.audit.txt")).unwrap();
    assert_eq!(stdout(&check), audit);
}

#[test]
fn reruns_are_byte_identical_and_seed_matters() {
    let dir = setup();
    ktriv(&["run-game", "--config", "exist.cfg", "--out", "a"], dir.path());
    ktriv(&["run-game", "--config", "exist.cfg", "--out", "b"], dir.path());
    ktriv(
        &["run-game", "--config", "exist.cfg", "--out", "c", "--seed", "4"],
        dir.path(),
    );
    let read = |p: &str| std::fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a/exist.trace.jsonl"), read("b/exist.trace.jsonl"));
    assert_eq!(read("a/exist.audit.txt"), read("b/exist.audit.txt"));
    assert_ne!(read("a/exist.trace.jsonl"), read("c/exist.trace.jsonl"));
}

#[test]
fn lowness_run_reports_golden_run() {
    let dir = setup();
    let run = ktriv(&["run-game", "--config", "low.cfg", "--out", "out"], dir.path());
    assert_eq!(run.status.code(), Some(0));
    let audit = std::fs::read_to_string(dir.path().join("out/low.audit.txt")).unwrap();
    assert!(audit.contains("golden_run="));
    let no_config = ktriv(&["verify-trace", "out/low.trace.jsonl"], dir.path());
    assert_eq!(no_config.status.code(), Some(3));
    let with = ktriv(
        &["verify-trace", "out/low.trace.jsonl", "--config", "low.cfg"],
        dir.path(),
    );
    assert_eq!(stdout(&with), audit);
}

#[test]
fn parallel_jobs_keep_config_order() {
    let dir = setup();
    let run = ktriv(
        &[
            "run-game",
            "--config",
            "exist.cfg",
            "low.cfg",
            "--out",
            "out",
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(run.status.code(), Some(0));
    let out = stdout(&run);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("exist.cfg") && lines[1].starts_with("low.cfg"));
}

#[test]
fn bad_inputs_have_distinct_codes() {
    let dir = setup();
    std::fs::write(
        dir.path().join("bad.cfg"),
        "variant = incompleteness\nc = 1.5\nmachine = table:m.txt\nus = incompleteness\nopponent = follower\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("m.txt"), "this is not a table\n").unwrap();
    let run = ktriv(&["run-game", "--config", "bad.cfg"], dir.path());
    assert_eq!(run.status.code(), Some(3));
    std::fs::write(dir.path().join("junk.jsonl"), "{not json\n").unwrap();
    assert_eq!(
        ktriv(&["verify-trace", "junk.jsonl"], dir.path()).status.code(),
        Some(4)
    );
    assert_eq!(
        ktriv(&["run-game", "--config", "missing.cfg"], dir.path())
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn edited_trace_reports_violation() {
    let dir = setup();
    ktriv(&["run-game", "--config", "exist.cfg", "--out", "out"], dir.path());
    let path = dir.path().join("out/exist.trace.jsonl");
    let text = std::fs::read_to_string(&path).unwrap();
    // blow one opponent length weight far past its budget
    let line = text
        .lines()
        .find(|l| l.contains("\"kind\":\"length\""))
        .expect("a length record")
        .to_string();
    let at = line.find("\"delta\":").unwrap();
    let edited = format!("{}\"delta\":[\"5\",0]}}", &line[..at]);
    std::fs::write(&path, text.replacen(&line, &edited, 1)).unwrap();
    let v = ktriv(&["verify-trace", "out/exist.trace.jsonl"], dir.path());
    assert_eq!(v.status.code(), Some(2));
    assert!(stdout(&v).contains("verdict=violation"));
}

#[test]
fn covering_demos() {
    let dir = setup();
    std::fs::write(dir.path().join("u.txt"), "0\n11\n").unwrap();
    let k = ktriv(&["kucera", "--u", "u.txt", "--x", "0110"], dir.path());
    assert_eq!(k.status.code(), Some(0));
    assert!(stdout(&k).contains("pieces of 0110 = [0, 11, 0]"));
    std::fs::write(dir.path().join("r.txt"), "0\n10\n").unwrap();
    let r = ktriv(&["kucera", "--u", "r.txt"], dir.path());
    assert!(stdout(&r).contains("rho^10 = 59049/1048576"));
    std::fs::write(dir.path().join("a.txt"), "1/2\n3/8\n1/1024\n").unwrap();
    let s = ktriv(&["series-cover", "--a", "a.txt"], dir.path());
    assert!(stdout(&s).contains("b = [1/2, 3/8, 1/1024]"));
    assert!(stdout(&s).contains("b equals a: true"));
    std::fs::write(dir.path().join("bad.txt"), "3/2\n").unwrap();
    assert_eq!(
        ktriv(&["series-cover", "--a", "bad.txt"], dir.path()).status.code(),
        Some(3)
    );
}
