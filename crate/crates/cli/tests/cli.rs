use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fleetcharge");

fn fleetcharge(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let out = fleetcharge(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Served(Child);

impl Drop for Served {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn generated_files_reproduce_the_seeded_run() {
    let dir = tempfile::tempdir().unwrap();
    let (gen, a, b) = (dir.path().join("gen"), dir.path().join("a"), dir.path().join("b"));
    let summary = ok(&["generate", "--seed", "5", "--preset", "tiny", "--out", path(&gen)]);
    assert_eq!(summary["valid"], true);
    let config = gen.join("config.json");
    let sessions = gen.join("sessions.csv");
    ok(&[
        "run",
        "--config",
        path(&config),
        "--sessions",
        path(&sessions),
        "--out",
        path(&a),
    ]);
    ok(&["run", "--seed", "5", "--preset", "tiny", "--out", path(&b)]);
    let read = |d: &Path| std::fs::read(d.join("report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn offline_results_feed_compare() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let source = ["--seed", "8", "--preset", "tiny"];
    let with = |cmd: &str, extra: &[&str]| {
        let mut args = vec![cmd];
        args.extend(source);
        args.extend(extra);
        ok(&args)
    };
    with("run", &["--out", path(&d.join("online"))]);
    with("run-baseline", &["--threshold", "75", "--out", path(&d.join("b75"))]);
    with("offline-ub", &["--out", path(d)]);
    let exact = with("offline-exact", &["--out", path(d)]);
    assert_eq!(exact["algorithm"], "offline-exact");

    let comparison = ok(&[
        "compare",
        "--reports",
        path(&d.join("online/report.json")),
        path(&d.join("b75/report.json")),
        "--upper-bound",
        path(&d.join("offline-ub.json")),
        "--optimum",
        path(&d.join("offline-exact.json")),
        "--out",
        path(&d.join("cmp")),
    ]);
    assert_eq!(comparison["competitive_ok"], true);
    assert_eq!(comparison["rows"][1]["algorithm"], "baseline-75");
    assert!(d.join("cmp/comparison.csv").exists() && d.join("cmp/plot.json").exists());
}

#[test]
fn compare_rejects_reports_from_different_instances() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["run", "--seed", "1", "--preset", "tiny", "--out", path(&d.join("x"))]);
    ok(&["run", "--seed", "2", "--preset", "tiny", "--out", path(&d.join("y"))]);
    let out = fleetcharge(&[
        "compare",
        "--reports",
        path(&d.join("x/report.json")),
        path(&d.join("y/report.json")),
        "--upper-bound",
        "1e9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different instances"));
}

#[test]
fn verify_exit_code_tracks_the_checks() {
    let base = [
        "verify",
        "--seed",
        "2",
        "--preset",
        "tiny",
        "--suite",
        "dapr",
        "--grid-points",
        "300",
    ];
    assert_eq!(fleetcharge(&base).status.code(), Some(0));
    let mut halved = base.to_vec();
    halved.extend(["--family", "energy", "--alpha", "1.0"]);
    let out = fleetcharge(&halved);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL dapr_energy"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = fleetcharge(&["run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    let out = fleetcharge(&["run", "--seed", "1", "--preset", "huge"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
    assert!(!fleetcharge(&["run", "--seed", "1", "--config", "x.json"])
        .status
        .success());
}

#[test]
fn client_mode_talks_to_a_separate_server() {
    let mut child = Command::new(BIN)
        .args(["serve", "--addr", "127.0.0.1:0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let served = Served(child);
    let url = line
        .trim()
        .strip_prefix("listening on ")
        .expect("listen line")
        .to_string();

    let remote = ok(&["--server", &url, "run", "--seed", "3", "--preset", "tiny"]);
    let local = ok(&["run", "--seed", "3", "--preset", "tiny"]);
    assert_eq!(remote, local);
    drop(served);
}
