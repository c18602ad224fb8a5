//! The committed reference and benchmark fixtures, run offline.

use std::path::PathBuf;

use tidyup_core::{load_dataset, Dataset, Split};
use tidyup_evalharness::*;
use tidyup_llmbackend::{BackendConfig, DecodingParams};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> PathBuf {
    root().join("fixtures").join(rel)
}

fn dataset(dir: &str) -> Dataset {
    load_dataset(fixture(&format!("{dir}/dataset.json"))).unwrap()
}

fn spec(kind: MethodKind, dir: &str) -> MethodSpec {
    let mut spec = MethodSpec::new(kind);
    spec.backend = Some(BackendConfig::replay(fixture(&format!("{dir}/replay.jsonl"))));
    spec
}

#[test]
fn committed_stores_match_their_scripts() {
    for (dir, human) in [("reference", Some("reference/human_summaries.tsv")), ("benchmark", None)] {
        let ds = dataset(dir);
        let script: CompletionScript =
            serde_json::from_str(&std::fs::read_to_string(fixture(&format!("{dir}/script.json"))).unwrap())
                .unwrap();
        let human = human
            .map(|h| load_human_summaries(&fixture(h)).unwrap())
            .unwrap_or_default();
        let records = scripted_records(&ds, &script, &human, &DecodingParams::default()).unwrap();
        let committed = std::fs::read_to_string(fixture(&format!("{dir}/replay.jsonl"))).unwrap();
        assert_eq!(store_text(&records), committed, "{dir}: regenerate with the record_replay example");
    }
}

fn frac(v: &serde_json::Value) -> f64 {
    v[0].as_f64().unwrap() / v[1].as_f64().unwrap()
}

/// Counts are compared exactly; means only up to summation order.
fn close(got: f64, want: f64) {
    assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
}

#[test]
fn benchmark_matches_hand_scoring() {
    let ds = dataset("benchmark");
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("benchmark/expected.json")).unwrap()).unwrap();
    let report = run_benchmark(&ds, &spec(MethodKind::Summarization, "benchmark"), 4).unwrap();

    for r in &report.results {
        let e = &expected["scenarios"][&r.scenario_id];
        for (split, res) in [("seen", &r.seen), ("unseen", &r.unseen)] {
            assert_eq!(res.correct as u64, e[split][0].as_u64().unwrap(), "{} {split}", r.scenario_id);
            assert_eq!(res.total as u64, e[split][1].as_u64().unwrap(), "{} {split}", r.scenario_id);
        }
        let kinds: Vec<String> = r
            .seen
            .anomalies
            .iter()
            .chain(&r.unseen.anomalies)
            .map(|a| serde_json::to_value(a).unwrap()["kind"].as_str().unwrap().to_string())
            .collect();
        let want: Vec<String> = serde_json::from_value(e["anomalies"].clone()).unwrap();
        assert_eq!(kinds, want, "{}", r.scenario_id);
    }
    close(report.macro_acc_seen, frac(&expected["macro_acc_seen"]));
    close(report.macro_acc_unseen, frac(&expected["macro_acc_unseen"]));
    for (c, s) in &report.per_criterion {
        let e = &expected["per_criterion"][c.as_str()];
        assert_eq!(s.scenarios as u64, e["scenarios"].as_u64().unwrap());
        close(s.macro_acc_seen.unwrap(), frac(&e["seen"]));
        close(s.macro_acc_unseen.unwrap(), frac(&e["unseen"]));
    }
    assert_eq!(report.anomalies, 6);
    assert_eq!(
        report.per_criterion.values().map(|c| c.scenarios).collect::<Vec<_>>(),
        tidyup_core::criteria_tally(&ds).into_values().collect::<Vec<_>>()
    );
}

#[test]
fn report_bytes_do_not_depend_on_workers() {
    let ds = dataset("benchmark");
    let s = spec(MethodKind::Summarization, "benchmark");
    let one = run_benchmark(&ds, &s, 1).unwrap();
    let eight = run_benchmark(&ds, &s, 8).unwrap();
    assert_eq!(one.to_json(), eight.to_json());
    assert_eq!(one.to_csv(), eight.to_csv());
    assert!(one.backend.as_ref().unwrap().replay_hash.is_some());
}

#[test]
fn printed_pipeline_is_reproduced() {
    let ds = dataset("reference");
    let report = run_benchmark(&ds, &spec(MethodKind::Summarization, "reference"), 2).unwrap();
    let get = |id: &str| report.results.iter().find(|r| r.scenario_id == id).unwrap();

    let shirts = get("shirts");
    assert_eq!(
        shirts.summary.as_deref(),
        Some("Put light-colored clothes in the drawer and dark-colored clothes in the closet.")
    );
    assert_eq!(shirts.unseen.accuracy, 1.0);
    assert!(shirts.unseen.anomalies.is_empty());
    // the seen re-query was never printed
    assert!(matches!(&shirts.seen.anomalies[..], [Anomaly::MethodError { detail }] if detail.contains("no replay entry")));

    let appendix = get("appendix");
    assert_eq!(appendix.seen.accuracy, 1.0);
    assert_eq!(appendix.seen.predictions[0], ("jacket".into(), "sofa".into()));
    assert_eq!(appendix.seen.predictions[2], ("soda can".into(), "recycling bin".into()));
    assert_eq!(appendix.unseen.accuracy, 0.0);
}

#[test]
fn direct_prompting_baselines_reproduce_printed_outputs() {
    let ds = dataset("reference");
    let printed = vec![
        ("black socks".to_string(), "drawer".to_string()),
        ("white shirt".into(), "closet".into()),
        ("navy socks".into(), "drawer".into()),
        ("beige shirt".into(), "closet".into()),
    ];
    for kind in [MethodKind::ExamplesOnly, MethodKind::Commonsense] {
        let report = run_benchmark(&ds, &spec(kind, "reference"), 1).unwrap();
        let shirts = report.results.iter().find(|r| r.scenario_id == "shirts").unwrap();
        assert_eq!(shirts.unseen.predictions, printed, "{kind}");
        assert_eq!(shirts.unseen.accuracy, 0.0);
    }
}

#[test]
fn human_summary_method_uses_the_supplied_text() {
    let ds = dataset("reference");
    let mut s = spec(MethodKind::HumanSummary, "reference");
    s.resources.human_summaries = Some(fixture("reference/human_summaries.tsv"));
    let report = run_benchmark(&ds, &s, 1).unwrap();
    let shirts = report.results.iter().find(|r| r.scenario_id == "shirts").unwrap();
    assert_eq!(shirts.unseen.accuracy, 1.0);
    let appendix = report.results.iter().find(|r| r.scenario_id == "appendix").unwrap();
    assert!(matches!(&appendix.unseen.anomalies[0], Anomaly::MethodError { detail } if detail.contains("no human summary")));
}

#[test]
fn primitive_pipeline_is_reproduced() {
    let ds = dataset("reference");
    let report = run_primitive_benchmark(&ds, &spec(MethodKind::Summarization, "reference"), 2).unwrap();
    let get = |id: &str| report.results.iter().find(|r| r.scenario_id == id).unwrap();
    assert_eq!(get("shirts").unseen.correct, 4);
    assert_eq!(get("shirts").summary.as_deref(), Some("Pick and place shirts, pick and toss socks."));
    assert_eq!(get("appendix").seen.accuracy, 1.0);
    assert_eq!(report.task, Task::Primitive);
}

#[test]
fn primitive_benchmark_needs_annotations() {
    let ds = dataset("benchmark");
    let err = run_primitive_benchmark(&ds, &spec(MethodKind::Summarization, "benchmark"), 1).unwrap_err();
    assert!(matches!(err, HarnessError::MissingAnnotations(id) if id == "b1"));
}

#[test]
fn one_wrong_primitive_scores_three_quarters() {
    let ds = dataset("reference");
    let shirts = ds.get("shirts").unwrap();
    let mut unseen = shirts.primitives(Split::Unseen).unwrap().to_vec();
    unseen[0].primitive = tidyup_core::Primitive::Place;
    let r = score_primitives(
        shirts,
        MethodOutput {
            summary: None,
            seen: SplitPrediction::default(),
            unseen: SplitPrediction { items: unseen, anomalies: vec![] },
        },
    );
    assert_eq!(r.unseen.accuracy, 0.75);
}

#[test]
fn configuration_errors_fail_fast() {
    let ds = dataset("benchmark");
    assert!(matches!(
        run_benchmark(&ds, &MethodSpec::new(MethodKind::Taxonomy), 1),
        Err(HarnessError::Config(_))
    ));
    assert!(matches!(
        run_benchmark(&ds, &MethodSpec::new(MethodKind::Summarization), 1),
        Err(HarnessError::Config(_))
    ));
    assert!(run_benchmark(&ds, &spec(MethodKind::Summarization, "benchmark"), 0).is_err());
    let mut missing = spec(MethodKind::Summarization, "benchmark");
    missing.backend = Some(BackendConfig::replay(fixture("benchmark/nope.jsonl")));
    assert!(matches!(run_benchmark(&ds, &missing, 1), Err(HarnessError::Backend(_))));
}

#[test]
fn nearest_neighbor_methods_score_seen_objects_perfectly() {
    let ds = dataset("reference");
    let mut s = MethodSpec::new(MethodKind::Taxonomy);
    s.resources.taxonomy = Some(fixture("baselines/taxonomy_edges.tsv"));
    s.resources.synonyms = Some(fixture("baselines/taxonomy_synonyms.tsv"));
    s.resources.name_mapping = Some(fixture("baselines/name_mapping.tsv"));
    let report = run_benchmark(&ds, &s, 2).unwrap();
    let shirts = report.results.iter().find(|r| r.scenario_id == "shirts").unwrap();
    // all shirts share one concept, so they tie at distance 0 and follow the
    // first seen shirt to the drawer; the socks find themselves
    assert_eq!(shirts.seen.accuracy, 0.5);
    assert!(report.backend.is_none());

    let mut e = MethodSpec::new(MethodKind::Embedding);
    e.resources.embeddings = Some(fixture("baselines/embeddings.tsv"));
    let report = run_benchmark(&ds, &e, 2).unwrap();
    let shirts = report.results.iter().find(|r| r.scenario_id == "shirts").unwrap();
    assert_eq!(shirts.seen.accuracy, 1.0);
    let appendix = report.results.iter().find(|r| r.scenario_id == "appendix").unwrap();
    // appendix objects have no vectors: anomalies, not an aborted run
    assert_eq!(appendix.seen.anomalies.len(), 10);
}
