//! CLI acceptance: deterministic JSON output and the exit-code contract.
//! Each test prints a PASS line (visible with `--nocapture`).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn oospect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oospect"))
        .args(args)
        .output()
        .expect("binary must run")
}

fn planted() -> String {
    fixture("corpus/planted.moo").display().to_string()
}

#[test]
fn criterion_10_json_output_is_byte_identical_across_runs() {
    let args =
        ["analyze", "--src", &planted(), "--builtin", "all", "--format", "json"];
    let first = oospect(&args);
    let second = oospect(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, second.stdout, "stdout must be byte-identical");
    println!("criterion 10a (byte-identical JSON across runs): PASS");
}

#[test]
fn criterion_10_exit_codes() {
    // success: suspects found, but failure not requested
    let success = oospect(&["analyze", "--src", &planted(), "--builtin", "GodClass"]);
    assert_eq!(success.status.code(), Some(0));

    // suspects + --fail-on-suspects
    let suspects = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--builtin",
        "GodClass",
        "--fail-on-suspects",
    ]);
    assert_eq!(suspects.status.code(), Some(1));

    // clean model + --fail-on-suspects stays 0
    let clean = oospect(&[
        "analyze",
        "--src",
        &fixture("f1.moo").display().to_string(),
        "--builtin",
        "GodClass",
        "--fail-on-suspects",
    ]);
    assert_eq!(clean.status.code(), Some(0));

    // parse errors: SOD, MiniOO source, facts schema
    let bad_sod = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--strategy",
        &fixture("invalid/bad.sod").display().to_string(),
    ]);
    assert_eq!(bad_sod.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&bad_sod.stderr);
    assert!(stderr.contains("2:16"), "SOD errors carry a position: {stderr}");

    let bad_source = oospect(&[
        "analyze",
        "--src",
        &fixture("invalid/bad.moo").display().to_string(),
        "--builtin",
        "GodClass",
    ]);
    assert_eq!(bad_source.status.code(), Some(2));

    // model validation error: facts file with an inheritance cycle
    let cyclic = oospect(&[
        "analyze",
        "--facts",
        &fixture("invalid/cycle.json").display().to_string(),
        "--builtin",
        "GodClass",
    ]);
    assert_eq!(cyclic.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&cyclic.stderr);
    assert!(stderr.contains("inheritance cycle"), "{stderr}");

    // usage error: no input at all
    let usage = oospect(&["analyze"]);
    assert_eq!(usage.status.code(), Some(2));

    // usage error: input but no strategies and no --metrics-only
    let no_strategies = oospect(&["analyze", "--src", &planted()]);
    assert_eq!(no_strategies.status.code(), Some(2));

    println!("criterion 10b (exit codes 0/1/2/3): PASS");
}

#[test]
fn shipped_builtin_sod_file_works_as_a_strategy_file() {
    let sod = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/assets/builtin.sod")
        .display()
        .to_string();
    let via_file = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--strategy",
        &sod,
        "--format",
        "json",
    ]);
    let via_builtin =
        oospect(&["analyze", "--src", &planted(), "--builtin", "all", "--format", "json"]);
    assert_eq!(via_file.status.code(), Some(0));

    // same three strategies, so the same suspects; report order differs
    // (file order vs registry order), so compare per strategy
    let parse = |bytes: &[u8]| -> serde_json::Value { serde_json::from_slice(bytes).unwrap() };
    let by_name = |v: &serde_json::Value| -> std::collections::BTreeMap<String, serde_json::Value> {
        v.as_array()
            .unwrap()
            .iter()
            .map(|r| (r["strategy"].as_str().unwrap().to_string(), r["suspects"].clone()))
            .collect()
    };
    assert_eq!(by_name(&parse(&via_file.stdout)), by_name(&parse(&via_builtin.stdout)));
}

#[test]
fn text_and_json_reports_list_the_same_suspects() {
    let json_out = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--builtin",
        "all",
        "--format",
        "json",
    ]);
    let text_out = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--builtin",
        "all",
        "--format",
        "text",
    ]);

    let json: serde_json::Value =
        serde_json::from_slice(&json_out.stdout).expect("valid JSON report");
    let mut json_suspects: Vec<String> = json
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|report| report["suspects"].as_array().unwrap().iter())
        .map(|suspect| suspect["id"].as_str().unwrap().to_string())
        .collect();
    json_suspects.sort();

    let text = String::from_utf8_lossy(&text_out.stdout);
    let mut text_suspects: Vec<String> = text
        .lines()
        .filter(|line| line.starts_with("  ") && line.contains("["))
        .map(|line| line.split_whitespace().next().unwrap().to_string())
        .collect();
    text_suspects.sort();

    assert_eq!(json_suspects, text_suspects);
    assert_eq!(
        json_suspects,
        vec![
            "class:Blob".to_string(),
            "class:Record".to_string(),
            "method:Blob.doEverything".to_string(),
        ]
    );
}

#[test]
fn dump_facts_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let facts_path = dir.path().join("planted-facts.json");

    let from_source = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--builtin",
        "all",
        "--format",
        "json",
        "--dump-facts",
        &facts_path.display().to_string(),
    ]);
    assert_eq!(from_source.status.code(), Some(0));
    assert!(facts_path.exists());

    let from_facts = oospect(&[
        "analyze",
        "--facts",
        &facts_path.display().to_string(),
        "--builtin",
        "all",
        "--format",
        "json",
    ]);
    assert_eq!(from_facts.status.code(), Some(0));
    assert_eq!(from_source.stdout, from_facts.stdout, "facts path must reproduce the report");
}

#[test]
fn metrics_only_reports_all_metrics() {
    let out = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--metrics-only",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let metrics = json["metrics"].as_object().unwrap();
    for name in ["CC", "MLOC", "NOPA", "WMC", "DIT", "NOC", "CBO", "RFC", "LCOM", "TCC", "ATFD"] {
        assert!(metrics.contains_key(name), "missing {name}");
    }
    assert_eq!(metrics["WMC"]["class:Blob"], serde_json::json!(9.0));
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let run = oospect(&[
        "analyze",
        "--src",
        &planted(),
        "--builtin",
        "GodClass",
        "--format",
        "json",
        "--output",
        &out_path.display().to_string(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    assert!(run.stdout.is_empty(), "report goes to the file, not stdout");
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert!(written.contains("class:Blob"));
}

#[test]
fn tune_prints_scores_and_the_winner() {
    let out = oospect(&[
        "tune",
        "--corpus",
        &fixture("tuning/corpus.json").display().to_string(),
        "--template",
        &fixture("tuning/template.sod").display().to_string(),
        "--grid",
        &fixture("tuning/grid.json").display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("$p=25%  score 0.0000"), "{stdout}");
    assert!(stdout.contains("winner: $p=50%  score 1.0000"), "{stdout}");
}

#[test]
fn tune_with_missing_grid_file_exits_2() {
    let out = oospect(&[
        "tune",
        "--corpus",
        &fixture("tuning/corpus.json").display().to_string(),
        "--template",
        &fixture("tuning/template.sod").display().to_string(),
        "--grid",
        &fixture("tuning/nope.json").display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tune_with_empty_corpus_exits_2_and_says_so() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.json");
    std::fs::write(&corpus, r#"{"samples": []}"#).unwrap();
    let out = oospect(&[
        "tune",
        "--corpus",
        &corpus.display().to_string(),
        "--template",
        &fixture("tuning/template.sod").display().to_string(),
        "--grid",
        &fixture("tuning/grid.json").display().to_string(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no samples"), "{stderr}");
}
