use std::path::PathBuf;
use std::process::{Command, Output};

use locaray::{verify, ArrayFile};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn locaray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locaray"))
        .args(args)
        .output()
        .expect("failed to launch locaray")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_printer_fixture() {
    let path = data("printer.la");
    let o = locaray(&["verify", "--array", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("is_locating_1bar=true\n"));
    assert!(out.contains("interactions=30\n"));
}

#[test]
fn verify_rejects_the_covering_array() {
    let path = data("printer_ca.la");
    let o = locaray(&["verify", "--array", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("is_covering=true\n"));
    assert!(out.contains("is_locating_1bar=false\n"));
    assert!(out.contains("collisions=36\n"));
}

#[test]
fn bound_for_2_cubed() {
    let o = locaray(&["bound", "--model", "2^3", "--strength", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "low=6 high=9\n");
}

#[test]
fn locate_the_printer_fault() {
    let path = data("printer.la");
    let o = locaray(&[
        "locate",
        "--array",
        path.to_str().unwrap(),
        "--failing",
        "4,5,10",
        "--strength",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    // Factor 2 (size) = A5, factor 3 (color) = No.
    assert_eq!(stdout(&o), "matches=1\n{(2, 1), (3, 1)}\n");

    let o = locaray(&["locate", "--array", path.to_str().unwrap(), "--failing", ""]);
    assert_eq!(stdout(&o), "matches=0\n");

    let o = locaray(&["locate", "--array", path.to_str().unwrap(), "--failing", "11"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn missing_model_is_a_usage_error() {
    let o = locaray(&["generate", "--strength", "2", "--out", "unused.la"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--model"));
}

#[test]
fn generate_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("la.txt");
    let o = locaray(&[
        "generate",
        "--model",
        "2^3",
        "--strength",
        "2",
        "--seed",
        "1",
        "--timeout",
        "60",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = stdout(&o);
    assert!(meta.contains("rows=6\n"));
    assert!(meta.contains("seed=1\n"));
    assert!(meta.lines().any(|l| l.starts_with("elapsed_s=")));

    let file = ArrayFile::read(&out).unwrap();
    assert_eq!(file.array.num_rows(), 6);
    assert!(verify(&file.array, file.strength).unwrap().is_locating_1bar);

    let o = locaray(&["verify", "--array", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn capacity_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("la.txt");
    let o = Command::new(env!("CARGO_BIN_EXE_locaray"))
        .args([
            "generate",
            "--model",
            "2^20",
            "--strength",
            "3",
            "--out",
            out.to_str().unwrap(),
        ])
        .env("LOCARAY_MEM_BUDGET_MB", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("9120 interactions"));
    assert!(!out.exists());
}

#[test]
fn tiny_timeout_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("la.txt");
    let o = locaray(&[
        "generate",
        "--model",
        "2^60 3^20",
        "--strength",
        "2",
        "--timeout",
        "0.000001",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("rows=\n"));
    assert!(!out.exists());
}

#[test]
fn empty_suite_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.csv");
    std::fs::write(&suite, "# nothing here\n").unwrap();
    let o = locaray(&["bench", "--suite", suite.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "name,model,x,y,runs,mean_time_s,mean_rows,min_rows\n");
}

#[test]
fn bench_writes_csv_and_sidecar_log() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.csv");
    std::fs::write(&suite, "name,model\ntiny,2^3\n").unwrap();
    let csv = dir.path().join("out.csv");
    let o = locaray(&[
        "bench",
        "--suite",
        suite.to_str().unwrap(),
        "--runs",
        "5",
        "--timeout",
        "60",
        "--strength",
        "2",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 8);
    assert_eq!(&fields[..5], ["tiny", "2^3", "5", "5", "5"]);
    assert_eq!(fields[7], "6");
    assert!(!text.contains('\r'));

    let log = std::fs::read_to_string(dir.path().join("out.csv.runs.log")).unwrap();
    assert_eq!(log.lines().count(), 6);
}

#[test]
fn unreadable_suite_fails() {
    let o = locaray(&["bench", "--suite", "/nonexistent/suite.csv"]);
    assert_ne!(o.status.code(), Some(0));
}
