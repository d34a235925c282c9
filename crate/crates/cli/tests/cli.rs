use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stylodiv::corpus::Reservoir;
use stylodiv::synth::{self, Style};

fn stylodiv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stylodiv"))
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("STYLODIV_WORKERS")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = stylodiv(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write_jsonl(path: &Path, texts: &[String]) {
    let body: String = texts
        .iter()
        .map(|t| serde_json::json!({ "text": t }).to_string() + "\n")
        .collect();
    fs::write(path, body).unwrap();
}

fn texts(n: usize, seed: u64, style: &Style) -> Vec<String> {
    synth::generate(n, seed, style).into_iter().map(|d| d.text).collect()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn with_corpus(n: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_jsonl(&dir.path().join("human.jsonl"), &texts(n, 10, &Style::human()));
        Workspace { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn baseline(&self) {
        ok(self.path(), &["baseline", "human.jsonl", "-o", "base.json"]);
    }
}

#[test]
fn baseline_rerun_is_byte_identical() {
    let ws = Workspace::with_corpus(120);
    ok(ws.path(), &["baseline", "human.jsonl", "-o", "a.json", "--workers", "1"]);
    ok(ws.path(), &["baseline", "human.jsonl", "-o", "b.json", "--workers", "3"]);
    assert_eq!(fs::read(ws.file("a.json")).unwrap(), fs::read(ws.file("b.json")).unwrap());
    let b: serde_json::Value = serde_json::from_slice(&fs::read(ws.file("a.json")).unwrap()).unwrap();
    assert_eq!(b["schema"], "stylodiv-baseline/1");
    assert_eq!(b["doc_count"], 120);
    assert_eq!(b["build_timestamp"], 1700000000u64);
    assert_eq!(b["provenance"]["seed"], 42);
    assert_eq!(b["provenance"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn sample_limit_above_corpus_size_is_noted() {
    let ws = Workspace::with_corpus(30);
    let out = ok(ws.path(), &["baseline", "human.jsonl", "--sample-limit", "100"]);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("no sampling"), "{err}");
    assert_eq!(json(&out)["doc_count"], 30);

    let out = ok(ws.path(), &["baseline", "human.jsonl", "--sample-limit", "10"]);
    assert_eq!(json(&out)["doc_count"], 10);
    assert_eq!(json(&out)["sample_limit"], 10);
}

#[test]
fn resample_of_baseline_is_null() {
    let ws = Workspace::with_corpus(3000);
    ws.baseline();
    let mut r = Reservoir::new(1000, 42);
    for t in texts(3000, 10, &Style::human()) {
        r.offer(t);
    }
    write_jsonl(&ws.file("resample.jsonl"), &r.into_items());
    let report = json(&ok(ws.path(), &["analyze", "resample.jsonl", "--baseline", "base.json"]));
    let mean = report["mean_ar"].as_f64().unwrap();
    assert!((0.8..=1.25).contains(&mean), "{mean}");
    assert!(report["divergent_fraction"].as_f64().unwrap() < 0.5);
    assert_eq!(report["hypothesis"], false);
}

#[test]
fn styled_samples_support_the_hypothesis() {
    let ws = Workspace::with_corpus(400);
    ws.baseline();
    write_jsonl(&ws.file("styled.jsonl"), &texts(80, 5, &Style::assistant()));
    let out = ok(
        ws.path(),
        &["analyze", "styled.jsonl", "--baseline", "base.json", "--model", "m1", "--table", "t.csv"],
    );
    let report = json(&out);
    assert_eq!(report["model"], "m1");
    assert_eq!(report["hypothesis"], true);
    assert!(report["provenance"]["inputs"].as_array().unwrap().len() == 2);
    let table = fs::read_to_string(ws.file("t.csv")).unwrap();
    assert!(table.starts_with("feature,category,p_m,p_c,status,ar"));
    assert_eq!(table.lines().count(), 25);
}

#[test]
fn worker_count_does_not_change_outputs() {
    let ws = Workspace::with_corpus(300);
    ws.baseline();
    write_jsonl(&ws.file("s.jsonl"), &texts(200, 6, &Style::assistant()));
    let run = |w: &str| {
        let out = ok(ws.path(), &["analyze", "s.jsonl", "--baseline", "base.json", "--workers", w]);
        let feats = ok(ws.path(), &["extract", "s.jsonl", "--workers", w]);
        let div = ok(ws.path(), &["diversity", "s.jsonl", "--workers", w]);
        (out.stdout, feats.stdout, div.stdout)
    };
    assert_eq!(run("1"), run("8"));
}

#[test]
fn workers_env_var_is_honoured() {
    let ws = Workspace::with_corpus(10);
    let out = Command::new(env!("CARGO_BIN_EXE_stylodiv"))
        .current_dir(ws.path())
        .env("STYLODIV_WORKERS", "0")
        .args(["baseline", "human.jsonl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_two() {
    let ws = Workspace::with_corpus(20);
    ws.baseline();
    fs::write(ws.file("empty.jsonl"), "").unwrap();
    for args in [
        vec!["analyze", "empty.jsonl", "--baseline", "base.json"],
        vec!["analyze", "human.jsonl", "--baseline", "missing.json"],
        vec!["analyze", "human.jsonl", "--baseline", "base.json", "--delta", "1.5"],
        vec!["analyze", "human.jsonl", "--baseline", "base.json", "--exclude", "nonsense"],
        vec!["baseline", "empty.jsonl"],
        vec!["no-such-command"],
        vec!["simulate", "--grid", "3,2,1"],
        vec!["compare", "base.json"],
    ] {
        assert_eq!(stylodiv(ws.path(), &args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn taxonomy_mismatch_is_fatal() {
    let ws = Workspace::with_corpus(20);
    ws.baseline();
    let text = fs::read_to_string(ws.file("base.json"))
        .unwrap()
        .replace("stylodiv-taxonomy/24.1", "stylodiv-taxonomy/23.0");
    fs::write(ws.file("old.json"), text).unwrap();
    let out = stylodiv(ws.path(), &["analyze", "human.jsonl", "--baseline", "old.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("taxonomy version mismatch"));
}

#[test]
fn identical_documents_have_unit_self_bleu() {
    let ws = Workspace::with_corpus(1);
    write_jsonl(&ws.file("same.jsonl"), &vec!["the same sentence over and over again".to_string(); 5]);
    let out = ok(ws.path(), &["diversity", "same.jsonl", "--format", "tsv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "same");
    assert_eq!(row[1], "1");
}

#[test]
fn heatmap_rows_are_models_times_defined_features() {
    let ws = Workspace::with_corpus(300);
    ws.baseline();
    let mut reports = Vec::new();
    for (i, style) in [Style::human(), Style::assistant(), Style { ai_boost: 2.0, ..Style::human() }]
        .iter()
        .enumerate()
    {
        write_jsonl(&ws.file(&format!("m{i}.jsonl")), &texts(40, 20 + i as u64, style));
        ok(
            ws.path(),
            &["analyze", &format!("m{i}.jsonl"), "--baseline", "base.json", "-o", &format!("m{i}.json")],
        );
        reports.push(format!("m{i}.json"));
    }
    let mut args = vec!["report", "--heatmap", "heat.csv", "--format", "json"];
    args.extend(reports.iter().map(String::as_str));
    let panel = json(&ok(ws.path(), &args));
    assert_eq!(panel["schema"], "stylodiv-panel/1");
    let defined: u64 = panel["models"].as_array().unwrap().iter().map(|m| m["defined_features"].as_u64().unwrap()).sum();
    let heat = fs::read_to_string(ws.file("heat.csv")).unwrap();
    assert_eq!(heat.lines().count() as u64, 1 + defined);
    assert!(heat.starts_with("model,feature,log10_ar\n"));

    let ablation = String::from_utf8(ok(ws.path(), &["ablate", ".", "--subset", "full", "--subset", "em_dash,robust"]).stdout).unwrap();
    assert!(ablation.lines().nth(1).unwrap().starts_with("full,24,1,100,0,3,"), "{ablation}");
    assert!(ablation.lines().nth(2).unwrap().starts_with("\"em_dash,robust\",2,"), "{ablation}");
}

#[test]
fn compare_analyzes_raw_samples_with_a_baseline() {
    let ws = Workspace::with_corpus(300);
    ws.baseline();
    write_jsonl(&ws.file("base.jsonl"), &texts(40, 30, &Style::human()));
    write_jsonl(&ws.file("tuned.jsonl"), &texts(40, 31, &Style::assistant()));
    let out = ok(
        ws.path(),
        &["compare", "base.jsonl", "tuned.jsonl", "--baseline", "base.json", "--resamples", "1000", "--format", "json"],
    );
    let v = json(&out);
    assert_eq!(v["schema"], "stylodiv-compare/1");
    let pair = &v["pairs"][0];
    assert_eq!(pair["base_model"], "base");
    assert!(pair["change_pct"].as_f64().unwrap() > 0.0);
    assert_eq!(pair["test"]["method"], "permutation");
    assert_eq!(pair["test"]["seed"], 42);
    assert!(stylodiv(ws.path(), &["compare", "base.jsonl", "tuned.jsonl"]).status.code() == Some(2));
}

#[test]
fn txt_formats_are_ingested() {
    let ws = Workspace::with_corpus(1);
    fs::create_dir(ws.file("docs")).unwrap();
    for (i, t) in texts(5, 40, &Style::human()).iter().enumerate() {
        fs::write(ws.file(&format!("docs/{i}.txt")), t).unwrap();
    }
    let out = ok(ws.path(), &["baseline", "docs"]);
    assert_eq!(json(&out)["doc_count"], 5);

    fs::write(ws.file("d.txt"), "first doc here\n<|endoftext|>\nsecond doc\n<|endoftext|>\nthird\n").unwrap();
    let out = ok(ws.path(), &["baseline", "d.txt", "--input-format", "txt-delim"]);
    assert_eq!(json(&out)["doc_count"], 3);
    let out = ok(ws.path(), &["baseline", "d.txt", "--input-format", "txt-delim", "--delimiter", "second doc"]);
    assert_eq!(json(&out)["doc_count"], 2);
}

#[test]
fn simulate_sweeps_the_requested_axis() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["simulate", "--axis", "absorption", "--grid", "0,0.5,0.9", "--episodes", "200", "--steps", "100"],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis,value,amplification,mc_stderr,analytic,mean_emissions");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("absorption,0.9,"));
    let v = json(&ok(dir.path(), &["simulate", "--episodes", "100", "--format", "json", "--seed", "7"]));
    assert_eq!(v["params"]["seed"], 7);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn retest_reports_degenerate_and_pass() {
    let ws = Workspace::with_corpus(50);
    ws.baseline();
    let v = json(&ok(ws.path(), &["retest", "base.json", "base.json"]));
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["pearson_r"], 1.0);
}

#[test]
fn features_file_feeds_analysis() {
    let ws = Workspace::with_corpus(100);
    ws.baseline();
    write_jsonl(&ws.file("s.jsonl"), &texts(30, 50, &Style::assistant()));
    ok(ws.path(), &["extract", "s.jsonl", "-o", "s.features.jsonl"]);
    let from_text = json(&ok(ws.path(), &["analyze", "s.jsonl", "--baseline", "base.json"]));
    let from_features = json(&ok(ws.path(), &["analyze", "s.features.jsonl", "--baseline", "base.json"]));
    assert_eq!(from_text["ratios"], from_features["ratios"]);
    assert_eq!(from_text["sample"], from_features["sample"]);
    let out = stylodiv(ws.path(), &["diversity", "s.features.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}
