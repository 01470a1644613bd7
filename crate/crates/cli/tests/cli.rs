//! End-to-end runs of the condyr binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use condyr_core::sample;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condyr"))
}

fn write_sample_files(dir: &Path) -> Vec<PathBuf> {
    sample::snapshot_nquads()
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let path = dir.join(format!("v{}.nq", i + 1));
            fs::write(&path, text).unwrap();
            path
        })
        .collect()
}

fn load_sample(dir: &Path) -> PathBuf {
    let store = dir.join("sample.condyr");
    let files = write_sample_files(dir);
    let output = bin()
        .arg("load")
        .arg("--store")
        .arg(&store)
        .args(&files)
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    store
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn load_reports_per_version_counts_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_sample_files(dir.path());
    let store = dir.path().join("s.condyr");
    let output =
        bin().arg("load").arg("--store").arg(&store).args(&files).output().unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("version 1: 2 quads"), "{text}");
    assert!(text.contains("version 3: 5 quads"), "{text}");
    assert!(text.contains("V=3, quads=5, flat_rows=10"), "{text}");
}

#[test]
fn load_without_files_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let output =
        bin().arg("load").arg("--store").arg(dir.path().join("s")).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn reloading_the_same_files_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let files = write_sample_files(dir.path());
    let store_a = dir.path().join("a.condyr");
    let store_b = dir.path().join("b.condyr");
    for store in [&store_a, &store_b] {
        let output =
            bin().arg("load").arg("--store").arg(store).args(&files).output().unwrap();
        assert!(output.status.success());
    }
    assert_eq!(fs::read(&store_a).unwrap(), fs::read(&store_b).unwrap());
}

#[test]
fn parse_error_reports_file_and_line_and_keeps_store_absent() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nq");
    fs::write(&bad, "<:a> <:p> <:b> <:g> .\n<:a> <:p .\n").unwrap();
    let store = dir.path().join("s.condyr");
    let output = bin().arg("load").arg("--store").arg(&store).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("bad.nq") && err.contains("line 2"), "{err}");
    assert!(!store.exists());
}

#[test]
fn query_execute_prints_the_decoded_table() {
    let dir = tempfile::tempdir().unwrap();
    let store = load_sample(dir.path());
    let output = bin()
        .arg("query")
        .arg("--store")
        .arg(&store)
        .arg("--sort")
        .arg(sample::QUERY_KNOWS)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    assert_eq!(
        text,
        "v$s\tv$o\tng$g\tbs$g\n\
         :alice\t:bob\t:g1\t111\n\
         :bob\t:carol\t:g2\t011\n\
         :carol\t:alice\t:g2\t001\n"
    );
}

#[test]
fn query_json_format_emits_header_then_rows() {
    let dir = tempfile::tempdir().unwrap();
    let store = load_sample(dir.path());
    let output = bin()
        .arg("query")
        .arg("--store")
        .arg(&store)
        .arg("--format")
        .arg("json")
        .arg("--sort")
        .arg(sample::QUERY_COUNT_KNOWS)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = stdout(&output);
    let lines: Vec<&str> = text.trim().lines().map(str::trim).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains("\"columns\""), "{}", lines[0]);
    for line in &lines[1..] {
        let parsed: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(parsed.is_array());
    }
}

#[test]
fn query_sql_mode_contains_the_group_clause() {
    let dir = tempfile::tempdir().unwrap();
    let store = load_sample(dir.path());
    let output = bin()
        .arg("query")
        .arg("--store")
        .arg(&store)
        .arg("--mode")
        .arg("sql")
        .arg(sample::QUERY_COUNT_KNOWS)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout(&output).contains("GROUP BY (v$o)"));
}

#[test]
fn query_explain_mode_shows_the_lowering() {
    let dir = tempfile::tempdir().unwrap();
    let store = load_sample(dir.path());
    let output = bin()
        .arg("query")
        .arg("--store")
        .arg(&store)
        .arg("--mode")
        .arg("explain")
        .arg(sample::QUERY_KNOWS_VERSIONS)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(stdout(&output).contains("Lower ?g"));
}

#[test]
fn unsupported_query_exits_with_user_error() {
    let dir = tempfile::tempdir().unwrap();
    let store = load_sample(dir.path());
    let output = bin()
        .arg("query")
        .arg("--store")
        .arg(&store)
        .arg("SELECT ?s WHERE { ?s ?p ?o FILTER(?o) }")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("FILTER"));
}

#[test]
fn selftest_passes_and_fault_injection_fails_with_a_dump() {
    let output = bin().arg("selftest").arg("--rounds").arg("25").output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    assert!(text.contains("golden suite passed"), "{text}");
    assert!(text.contains("25 randomized rounds passed"), "{text}");

    let output = bin()
        .arg("selftest")
        .arg("--rounds")
        .arg("5")
        .env("CONDYR_FAULT", "and-join")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("golden check"));
}

#[test]
fn bench_reports_counters_and_validates_reps() {
    let dir = tempfile::tempdir().unwrap();
    let store = load_sample(dir.path());
    let queries = dir.path().join("queries");
    fs::create_dir(&queries).unwrap();
    fs::write(queries.join("knows.rq"), sample::QUERY_KNOWS).unwrap();
    fs::write(queries.join("join.rq"), sample::QUERY_KNOWS_LIKES).unwrap();

    let output = bin()
        .arg("bench")
        .arg("--store")
        .arg(&store)
        .arg("--queries")
        .arg(&queries)
        .arg("--reps")
        .arg("20")
        .arg("--warmup")
        .arg("5")
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = stdout(&output);
    assert!(text.contains("mean_us"), "{text}");
    assert!(text.contains("join.rq\t15"), "{text}");

    let output = bin()
        .arg("bench")
        .arg("--store")
        .arg(&store)
        .arg("--queries")
        .arg(&queries)
        .arg("--reps")
        .arg("5")
        .arg("--warmup")
        .arg("50")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
