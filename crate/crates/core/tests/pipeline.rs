mod common;

use std::collections::BTreeMap;
use std::fs;

use common::quick_config;
use rulenet::io::{file_sha256, read_json, read_text};
use rulenet::pipeline::*;
use rulenet::ruleset::RuleSet;

fn csv_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| header.iter().zip(l.split(',')).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}

#[test]
fn full_run_writes_every_artifact_and_hashes_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let summary = run_pipeline(&cfg).unwrap();
    assert_eq!(summary.stages, Stage::ALL.to_vec());

    let manifest: Manifest = read_json(&dir.path().join(MANIFEST)).unwrap();
    assert_eq!(manifest.config_sha256, cfg.fingerprint());
    assert_eq!(manifest.stages.len(), 6);
    for (stage, record) in &manifest.stages {
        let inputs: Vec<&str> = record.inputs.keys().map(String::as_str).collect();
        let mut expected = stage.inputs().to_vec();
        expected.sort();
        assert_eq!(inputs, expected, "{stage}");
        for (file, hash) in record.inputs.iter().chain(&record.outputs) {
            assert_eq!(&file_sha256(&dir.path().join(file)).unwrap(), hash, "{file}");
        }
    }
    for f in [DATASET, TEST, SCHEME, ENCODED, MODEL_TRAINED, MODEL_PRUNED, EXTRACTION, RULES, EVALUATION, RULE_STATS, REPORT] {
        assert!(manifest.stages.values().any(|r| r.outputs.contains_key(f)), "{f} not recorded");
    }
}

#[test]
fn training_rules_match_discretized_network() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&quick_config(dir.path())).unwrap();
    let rows = csv_rows(&read_text(&dir.path().join(EVALUATION)).unwrap());
    let training = rows.iter().find(|r| r["set"] == "training").unwrap();
    assert_eq!(training["disagreements"], "0");
}

#[test]
fn report_numbers_match_csvs() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&quick_config(dir.path())).unwrap();
    let report = read_text(&dir.path().join(REPORT)).unwrap();
    let eval = csv_rows(&read_text(&dir.path().join(EVALUATION)).unwrap());
    let (tr, te) = (&eval[0], &eval[1]);
    assert_eq!((tr["set"].as_str(), te["set"].as_str()), ("training", "testing"));

    let line = |prefix: &str| -> Vec<String> {
        let l = report.lines().find(|l| l.starts_with(prefix)).unwrap_or_else(|| panic!("no `{prefix}` line"));
        l[prefix.len()..].split_whitespace().map(str::to_string).collect()
    };
    assert_eq!(line("pruned network"), vec![tr["network_pct"].clone(), te["network_pct"].clone()]);
    assert_eq!(line("rules    "), vec![tr["rules_pct"].clone(), te["rules_pct"].clone()]);

    // Recompute the percentages from the counts.
    for r in &eval {
        let n: f64 = r["tuples"].parse().unwrap();
        for (count, pct) in [("network_correct", "network_pct"), ("rules_correct", "rules_pct")] {
            let c: f64 = r[count].parse().unwrap();
            assert_eq!(format!("{:.2}", 100.0 * c / n), r[pct]);
        }
    }

    let stats = csv_rows(&read_text(&dir.path().join(RULE_STATS)).unwrap());
    let start = report.lines().position(|l| l.starts_with("rule      total")).unwrap() + 1;
    let table: Vec<Vec<&str>> = report.lines().skip(start).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(table.len(), stats.len());
    for (row, s) in table.iter().zip(&stats) {
        assert_eq!(row, &vec![s["rule"].as_str(), s["total"].as_str(), s["correct_pct"].as_str()]);
    }
    let total: usize = stats.iter().map(|s| s["total"].parse::<usize>().unwrap()).sum();
    assert_eq!(total.to_string(), te["tuples"]);
}

#[test]
fn resumed_extraction_reproduces_rule_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(dir.path());
    run_pipeline(&cfg).unwrap();
    let rules = fs::read(dir.path().join(RULES)).unwrap();
    let report = fs::read(dir.path().join(REPORT)).unwrap();
    let before: Manifest = read_json(&dir.path().join(MANIFEST)).unwrap();

    cfg.stages = StageRange { from: Stage::Extract, to: Stage::Evaluate };
    let summary = run_pipeline(&cfg).unwrap();
    assert_eq!(summary.stages, vec![Stage::Extract, Stage::Evaluate]);
    assert_eq!(fs::read(dir.path().join(RULES)).unwrap(), rules);
    assert_eq!(fs::read(dir.path().join(REPORT)).unwrap(), report);
    let after: Manifest = read_json(&dir.path().join(MANIFEST)).unwrap();
    assert_eq!(after, before);
}

#[test]
fn empty_rule_set_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(dir.path());
    run_pipeline(&cfg).unwrap();
    fs::write(dir.path().join(RULES), "DEFAULT B\n").unwrap();
    cfg.stages = StageRange::only(Stage::Evaluate);
    run_pipeline(&cfg).unwrap();
    let report = read_text(&dir.path().join(REPORT)).unwrap();
    assert!(report.contains("rules 0 (default B)"), "{report}");
    let stats = read_text(&dir.path().join(RULE_STATS)).unwrap();
    assert_eq!(stats.lines().count(), 2);
    assert!(stats.lines().nth(1).unwrap().starts_with("default,400,"));
}

#[test]
fn invalid_margins_fail_before_any_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut cfg = quick_config(&out);
    cfg.objective.eta1 = 0.4;
    cfg.objective.eta2 = 0.1;
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!out.exists());
}

#[test]
fn stage_failure_names_the_stage_and_keeps_earlier_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick_config(dir.path());
    cfg.stages = StageRange { from: Stage::Generate, to: Stage::Train };
    run_pipeline(&cfg).unwrap();
    fs::write(dir.path().join(MODEL_TRAINED), "[]").unwrap();

    cfg.stages = StageRange { from: Stage::Prune, to: Stage::Evaluate };
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    match &err {
        PipelineError::Stage { stage, .. } => assert_eq!(*stage, Stage::Prune),
        other => panic!("unexpected {other:?}"),
    }
    assert!(dir.path().join(ENCODED).is_file());
    assert!(!dir.path().join(MODEL_PRUNED).exists());
}

#[test]
fn pruned_accuracy_floor_holds_and_rules_parse() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    run_pipeline(&cfg).unwrap();
    let summary: PruneSummary = read_json(&dir.path().join(PRUNE_REPORT)).unwrap();
    assert!(summary.report.final_accuracy >= cfg.prune.accuracy_floor);
    assert!(summary.report.final_links < summary.report.initial_links);
    let text = read_text(&dir.path().join(RULES)).unwrap();
    let rules: RuleSet = text.parse().unwrap();
    assert_eq!(rules.to_string(), text);
}
