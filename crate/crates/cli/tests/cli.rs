use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn drflow(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_drflow")).args(args).current_dir(root()).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Compares stdout with `tests/golden/<name>.txt`; `UPDATE_GOLDEN=1` rewrites it.
fn golden(name: &str, args: &[&str], exit: i32) {
    let (code, stdout, stderr) = drflow(args);
    assert_eq!(code, exit, "{name}: stderr: {stderr}");
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &stdout).unwrap();
    }
    let want = fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(stdout, want, "{name}");
}

#[test]
fn check_outputs() {
    golden("check_fig3c", &["check", "fixtures/fig3c.json"], 1);
    golden("check_fig3d", &["check", "fixtures/fig3d.json"], 1);
    golden("check_fig3e", &["check", "fixtures/fig3e.json"], 1);
    golden("check_fig4", &["check", "fixtures/fig4.json"], 0);
    golden("check_composite", &["check", "fixtures/fig3_composite.json"], 1);
}

#[test]
fn fig3d_names_rule_4() {
    let (_, out, _) = drflow(&["check", "fixtures/fig3d.json"]);
    assert!(out.lines().any(|l| l.starts_with("rule 4 single-sided dynamism")), "{out}");
}

#[test]
fn analyze_outputs() {
    golden("analyze_fig4", &["analyze", "fixtures/fig4.json"], 0);
    golden("analyze_static_chain", &["analyze", "fixtures/static_chain.json"], 0);
    golden("analyze_cycle_zero_delay", &["analyze", "fixtures/cycle_zero_delay.json"], 1);
    golden("analyze_fig4_len2", &["analyze", "fixtures/fig4_len2.json"], 1);
    golden("analyze_motion", &["analyze", "corpus/motion_detection.json"], 0);
}

#[test]
fn analyze_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.txt");
    let (code, stdout, _) = drflow(&["analyze", "fixtures/fig4.json", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert!(fs::read_to_string(out).unwrap().contains("Z2 = {a4}"));
}

#[test]
fn capacity_outputs() {
    golden("capacity_fig6", &["capacity", "fixtures/fig6_fifo.json"], 0);
    golden("capacity_static_c2", &["capacity", "fixtures/static_chain.json", "--c-factor", "2"], 0);
    golden("capacity_motion", &["capacity", "corpus/motion_detection.json"], 0);
    let (code, _, err) = drflow(&["capacity", "fixtures/fig6_fifo.json", "--c-factor", "1"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn run_outputs() {
    golden("run_motion", &["run", "corpus/motion_detection.json", "--iterations", "16", "--oracle"], 0);
    golden("run_bypass", &["run", "corpus/adaptive_bypass.json", "--iterations", "8", "--seed", "3", "--oracle"], 0);
    golden("run_dpd_zero", &["run", "corpus/dynamic_predistortion.json", "--iterations", "0"], 0);
}

#[test]
fn run_refuses_inconsistent_graph() {
    let (code, out, err) = drflow(&["run", "fixtures/cycle_zero_delay.json"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("DeadlockError"), "{err}");
}

#[test]
fn run_writes_trace_in_line_format() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("trace.txt");
    let (code, _, err) =
        drflow(&["run", "fixtures/fig6_fifo.json", "--iterations", "6", "--trace", t.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(t).unwrap();
    let events: Vec<_> = text.lines().map(|l| drflow_core::trace::parse_line(l).unwrap()).collect();
    assert_eq!(events.iter().filter(|e| e.1 == drflow_core::trace::TraceOp::Write).count(), 6);
    assert!(events.iter().all(|e| e.0 == "src.o->snk.i"));
}

#[test]
fn run_rejects_bad_pin() {
    let (code, _, err) = drflow(&["run", "fixtures/static_chain.json", "--pin", "nobody=0"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    let (code, _, err) = drflow(&["check", empty.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("parse error"), "{err}");

    let bad = dir.path().join("bad.json");
    let text = fs::read_to_string(root().join("fixtures/static_chain.json")).unwrap().replacen("\"static\"", "\"wobbly\"", 1);
    fs::write(&bad, text).unwrap();
    let (code, _, err) = drflow(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("actors[0].kind"), "{err}");

    let (code, _, _) = drflow(&["check", "fixtures/does_not_exist.json"]);
    assert_eq!(code, 2);
}
