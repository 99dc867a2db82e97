use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use gipgut_core::report::count_events;
use gipgut_core::{validate_report, CounterKind, SessionReport, TestStatus};

const F1: &str = "../core/tests/fixtures/f1_report.json";

fn gipgut() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gipgut"));
    for var in ["GIPGUT_ADDR", "GIPGUT_DATA_DIR", "GIPGUT_CATALOG", "GIPGUT_CLOCK", "GIPGUT_PROFILE"] {
        cmd.env_remove(var);
    }
    cmd
}

fn f1() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(F1)
}

fn offline<'a>(cmd: &'a mut Command, dir: &Path) -> &'a mut Command {
    cmd.arg("--offline").arg("--data-dir").arg(dir).args(["--clock", "fixed:2024-01-01"])
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

#[test]
fn replay_f1_prints_the_clicker_milestone() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(offline(gipgut().arg("replay").arg(f1()), dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Clicker ✓ milestone 1 (+25 XP)"), "{text}");
    assert!(text.contains("Level 1 — 25/100 XP"), "{text}");
}

#[test]
fn replaying_twice_reports_a_duplicate() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(offline(gipgut().arg("replay").arg(f1()).arg(f1()), dir.path()));
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches("Clicker ✓ milestone 1").count(), 1);
    assert!(text.contains("duplicate session — no effect"), "{text}");
}

#[test]
fn malformed_report_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("malformed.json");
    std::fs::write(&bad, r#"{"session_id": "not-a-uuid", "events": []}"#).unwrap();
    let out = run(offline(gipgut().arg("replay").arg(&bad), dir.path()));
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("malformed"), "{}", stderr(&out));

    let mut report: serde_json::Value = serde_json::from_slice(&std::fs::read(f1()).unwrap()).unwrap();
    report["session_id"] = "not-a-uuid".into();
    std::fs::write(&bad, report.to_string()).unwrap();
    let out = run(offline(gipgut().arg("replay").arg(&bad), dir.path()));
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("session_id"), "{}", stderr(&out));
}

#[test]
fn locked_icon_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(offline(gipgut().args(["profile", "set", "icon", "icon-dragon"]), dir.path()));
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("not unlocked"), "{}", stderr(&out));

    let out = run(offline(gipgut().args(["profile", "set", "icon", "icon-bug"]), dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("icon: icon-bug"));
}

#[test]
fn profile_show_on_a_fresh_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(offline(gipgut().args(["profile", "show"]), dir.path()));
    assert!(out.status.success());
    assert!(stdout(&out).contains("Level 1 — 0/100 XP"), "{}", stdout(&out));
}

#[test]
fn unreachable_server_exits_3() {
    let addr = format!("127.0.0.1:{}", free_port());
    for args in [&["profile", "show"][..], &["daily"], &["achievements"]] {
        let out = run(gipgut().args(args).args(["--addr", &addr]));
        assert_eq!(out.status.code(), Some(3), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn serve_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(gipgut()
        .args(["serve", "--addr", "127.0.0.1:0", "--catalog"])
        .arg(dir.path().join("missing.json"))
        .arg("--data-dir")
        .arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.json"), "{}", stderr(&out));

    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let out = run(gipgut().args(["serve", "--addr", &addr, "--data-dir"]).arg(dir.path()));
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let out = run(gipgut().args(["serve", "--addr", "0.0.0.0:0", "--data-dir"]).arg(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--allow-external"));
}

#[test]
fn simulate_is_deterministic_and_exact() {
    let sim = |args: &[&str]| run(gipgut().arg("simulate").args(args));
    let a = sim(&["--clicks", "10", "--seed", "1"]);
    let b = sim(&["--clicks", "10", "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let report: SessionReport = serde_json::from_slice(&sim(&["--pages", "3"]).stdout).unwrap();
    let report = validate_report(report).unwrap();
    assert_eq!(count_events(&report, CounterKind::PagesVisited), 3);

    let report: SessionReport = serde_json::from_slice(&sim(&["--tests", "2", "--fail", "1"]).stdout).unwrap();
    let mut statuses: Vec<_> = report.results.iter().map(|r| r.status).collect();
    statuses.sort_by_key(|s| *s == TestStatus::Passed);
    assert_eq!(statuses, [TestStatus::Failed, TestStatus::Passed]);

    assert_eq!(sim(&["--tests", "1", "--fail", "2"]).status.code(), Some(2));
}

struct Server {
    child: Child,
    addr: String,
}

impl Server {
    fn start(dir: &Path) -> Self {
        let mut child = gipgut()
            .args(["serve", "--addr", "127.0.0.1:0", "--clock", "fixed:2024-01-01", "--data-dir"])
            .arg(dir)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line.trim().strip_prefix("listening on ").expect("address line").to_owned();
        Self { child, addr }
    }

    /// Plain HTTP/1.1 GET, returning the body.
    fn get(&self, path: &str) -> Vec<u8> {
        let mut stream = TcpStream::connect(&self.addr).unwrap();
        write!(stream, "GET {path} HTTP/1.1\r\nHost: {}\r\nConnection: close\r\n\r\n", self.addr).unwrap();
        let mut raw = Vec::new();
        stream.read_to_end(&mut raw).unwrap();
        let split = raw.windows(4).position(|w| w == b"\r\n\r\n").unwrap();
        let head = String::from_utf8_lossy(&raw[..split]).to_ascii_lowercase();
        assert!(!head.contains("transfer-encoding: chunked"));
        raw[split + 4..].to_vec()
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[test]
fn json_output_matches_endpoint_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let server = Server::start(dir.path());

    let out = run(gipgut().arg("replay").arg(f1()).args(["--addr", &server.addr]));
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("Clicker ✓ milestone 1 (+25 XP)"));
    let mut remote_bodies = Vec::new();

    for (args, path) in [
        (&["profile", "show"][..], "/api/v1/profile"),
        (&["achievements", "--project", "demo-shop"], "/api/v1/achievements?project_id=demo-shop"),
        (&["daily"], "/api/v1/daily-task"),
    ] {
        let out = run(gipgut().args(args).args(["--json", "--addr", &server.addr]));
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        let mut body = server.get(path);
        body.push(b'\n');
        assert_eq!(stdout(&out), String::from_utf8(body).unwrap(), "{args:?}");
        remote_bodies.push((args, out.stdout));
    }
    drop(server);

    // offline on the same data directory prints the same bytes
    for (args, remote) in remote_bodies {
        let out = run(offline(gipgut().args(args).arg("--json"), dir.path()));
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        assert_eq!(out.stdout, remote, "{args:?}");
    }
}
