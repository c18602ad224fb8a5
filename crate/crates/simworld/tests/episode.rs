use std::collections::HashMap;

use proptest::prelude::*;
use tidyup_core::{ObjectName, Primitive};
use tidyup_llmbackend::{DecodingParams, ReplayBackend, DEFAULT_MODEL};
use tidyup_simworld::*;

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/sim/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn appendix() -> WorldFile {
    WorldFile::load(fixture("appendix_world.json")).unwrap()
}

fn replay() -> ReplayBackend {
    ReplayBackend::open(fixture("appendix_replay.jsonl"), DEFAULT_MODEL).unwrap()
}

fn scene(file: WorldFile, cfg: &SimConfig) -> (Scene, RuleTable) {
    let t = RuleTable::from_ground_truth(&file).unwrap();
    (Scene::new(file, cfg.inflation).unwrap(), t)
}

#[test]
fn derived_rules_match_printed_selections() {
    let w = appendix();
    let params = DecodingParams::default();
    let rules = derive_rules(&w.examples, &w.receptacle_names(), &replay(), &params).unwrap();
    let categories: Vec<&str> = rules.categories.iter().map(|c| c.as_str()).collect();
    assert_eq!(categories, ["clothing", "snack", "can", "wooden block", "fruit"]);
    let table = resolve_rules(&rules, &w.receptacle_names(), &replay(), &params).unwrap();
    let got: HashMap<&str, (&str, Primitive)> = table
        .entries()
        .map(|e| (e.category.as_str(), (e.receptacle.as_str(), e.primitive)))
        .collect();
    let expect = HashMap::from([
        ("clothing", ("sofa", Primitive::Place)),
        ("snack", ("plastic storage box", Primitive::Toss)),
        ("can", ("recycling bin", Primitive::Toss)),
        ("wooden block", ("drawer", Primitive::Place)),
        ("fruit", ("black storage box", Primitive::Toss)),
    ]);
    assert_eq!(got, expect);
    assert!(table.warnings.is_empty());
    // the printed selections agree with the scene's ground truth
    assert_eq!(table, RuleTable::from_ground_truth(&w).unwrap());
}

#[test]
fn perfect_components_put_everything_away() {
    let w = appendix();
    let rules: Rules = serde_json::from_str(&std::fs::read_to_string(fixture("appendix_rules.json")).unwrap()).unwrap();
    let cfg = SimConfig::load(fixture("perfect.json")).unwrap();
    let log = run_episode(&w, &rules, &replay(), &DecodingParams::default(), &cfg, None).unwrap();
    assert_eq!(log.overall, 1.0);
    assert_eq!((log.correct, log.deposited, log.total), (10, 10, 10));
    assert!(log.anomalies.is_empty(), "{:?}", log.anomalies);
    assert_eq!(log.termination, Termination::NoDetectedObjects);
    assert_eq!(log.rates.localization, Some(1.0));
    assert_eq!(log.rates.classification, Some(1.0));
    assert_eq!(log.rates.selection, Some(1.0));
    assert_eq!(log.rates.execution, Some(1.0));
}

#[test]
fn every_monte_carlo_world_is_clean_with_perfect_components() {
    let cfg = SimConfig::perfect();
    for i in 1..=8 {
        let (s, t) = scene(WorldFile::load(fixture(&format!("mc_{i:02}.json"))).unwrap(), &cfg);
        let log = s.run(&t, &cfg, None).unwrap();
        assert_eq!(log.overall, 1.0, "mc_{i:02}");
        assert!(log.anomalies.is_empty(), "mc_{i:02}: {:?}", log.anomalies);
        assert_eq!(t.categories().len(), 2);
    }
}

#[test]
fn same_seed_same_log_and_trace() {
    let cfg = SimConfig { rng_seed: 77, ..SimConfig::measured_rates() };
    let (s, t) = scene(appendix(), &cfg);
    let run = || {
        let mut trace = Vec::new();
        let log = s.run(&t, &cfg, Some(&mut trace)).unwrap();
        (serde_json::to_string(&log).unwrap(), trace)
    };
    let (a, ta) = run();
    let (b, tb) = run();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let lines: Vec<serde_json::Value> = std::str::from_utf8(&ta)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for l in &lines {
        for key in ["step", "action", "object", "pose", "outcome"] {
            assert!(l.get(key).is_some(), "missing {key} in {l}");
        }
    }
    let differing = (0..20u64).any(|seed| {
        let other = s.run(&t, &SimConfig { rng_seed: seed, ..cfg.clone() }, None).unwrap();
        serde_json::to_string(&other).unwrap() != a
    });
    assert!(differing);
}

#[test]
fn missing_rule_and_unknown_category_are_anomalies() {
    let cfg = SimConfig::perfect();
    let w = appendix();
    let full = RuleTable::from_ground_truth(&w).unwrap();
    let entries: Vec<RuleEntry> = full.entries().filter(|e| e.category.as_str() != "fruit").cloned().collect();
    let table = RuleTable::new(full.categories().to_vec(), entries).unwrap();
    let s = Scene::new(w.clone(), cfg.inflation).unwrap();
    let log = s.run(&table, &cfg, None).unwrap();
    assert_eq!(log.correct, 8);
    assert_eq!(log.anomalies.len(), 2);
    assert!(log.anomalies.iter().all(|a| a.contains("no rule")));

    let cats: Vec<ObjectName> = full.categories().iter().filter(|c| c.as_str() != "can").cloned().collect();
    let entries: Vec<RuleEntry> = full.entries().filter(|e| e.category.as_str() != "can").cloned().collect();
    let log = s.run(&RuleTable::new(cats, entries).unwrap(), &cfg, None).unwrap();
    assert_eq!(log.correct, 8);
    assert!(log.anomalies.iter().all(|a| a.contains("not in the label set")));
}

#[test]
fn step_budget_ends_the_episode() {
    let cfg = SimConfig { max_steps: 40, ..SimConfig::perfect() };
    let (s, t) = scene(appendix(), &cfg);
    let log = s.run(&t, &cfg, None).unwrap();
    assert_eq!(log.termination, Termination::MaxSteps);
    assert!(log.steps <= 41);
    assert!(log.overall < 1.0);
}

#[test]
fn bad_configs_are_rejected() {
    let (s, t) = scene(appendix(), &SimConfig::perfect());
    for cfg in [
        SimConfig { p_classify: 1.5, ..SimConfig::perfect() },
        SimConfig { dt: 0.0, ..SimConfig::perfect() },
        SimConfig { lookahead: -1.0, ..SimConfig::perfect() },
        SimConfig { max_steps: 0, ..SimConfig::perfect() },
    ] {
        assert!(matches!(s.run(&t, &cfg, None), Err(SimError::Config(_))));
    }
    let mut w = appendix();
    w.robot = Pose2D::new(3.6, 1.5, 0.0);
    assert!(matches!(Scene::new(w, 0.15), Err(SimError::Config(_))));
    let mut w = appendix();
    w.receptacles[0].drop_point = Point::new(3.0, 0.1);
    assert!(Scene::new(w, 0.15).is_err());
}

#[test]
fn failed_attempts_can_retry() {
    let cfg = SimConfig { p_place: 0.5, p_toss: 0.5, max_attempts_per_object: 50, ..SimConfig::perfect() };
    let (s, t) = scene(appendix(), &cfg);
    let log = s.run(&t, &cfg, None).unwrap();
    assert_eq!(log.overall, 1.0);
    assert!(log.objects.iter().map(|r| r.attempts).sum::<u32>() > 10);
}

fn assert_invariants(s: &Scene, t: &RuleTable, cfg: &SimConfig) -> Result<(), TestCaseError> {
    let n = s.file.objects.len();
    let mut prev: Option<Vec<ObjectState>> = None;
    let mut failure = None;
    let mut check = |o: &episode::Observation| {
        if failure.is_some() {
            return;
        }
        let w = o.world;
        if let Err(e) = w.check_invariants() {
            failure = Some(e);
            return;
        }
        let c = w.counts();
        if c.on_floor + c.grasped + c.deposited != n {
            failure = Some(format!("step {}: counts {c:?}", o.step));
        }
        if !s.body_grid().is_free_point(w.robot.position()) {
            failure = Some(format!("step {}: robot in collision at {:?}", o.step, w.robot));
        }
        let now: Vec<ObjectState> = w.objects.iter().map(|o| o.state).collect();
        if let Some(before) = &prev {
            for (a, b) in before.iter().zip(&now) {
                let legal = a == b
                    || matches!((a, b), (ObjectState::OnFloor, ObjectState::Grasped))
                    || matches!((a, b), (ObjectState::Grasped, ObjectState::OnFloor | ObjectState::Deposited(_)));
                if !legal {
                    failure = Some(format!("step {}: {a:?} -> {b:?}", o.step));
                }
            }
        }
        prev = Some(now);
    };
    let log = s.run_observed(t, cfg, None, &mut check).unwrap();
    prop_assert_eq!(failure, None);
    prop_assert_eq!(log.correct, log.objects.iter().filter(|r| r.correct).count());
    prop_assert!((log.overall - log.correct as f64 / log.total as f64).abs() < 1e-15);
    prop_assert!(log.correct <= log.deposited);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn episode_invariants_hold(seed in any::<u64>(), world in 0usize..9, p in 0.0f64..=1.0, retries in 1u32..4) {
        let file = if world == 0 { appendix() } else { WorldFile::load(fixture(&format!("mc_{world:02}.json"))).unwrap() };
        let cfg = SimConfig {
            rng_seed: seed,
            p_localize: p.max(0.5),
            p_classify: p,
            p_place: p,
            p_toss: 1.0 - p / 2.0,
            max_attempts_per_object: retries,
            ..SimConfig::perfect()
        };
        let (s, t) = scene(file, &cfg);
        assert_invariants(&s, &t, &cfg)?;
    }
}

#[test]
fn component_rates_converge() {
    let cfg = SimConfig::measured_rates();
    let scenes: Vec<_> = (1..=8)
        .map(|i| scene(WorldFile::load(fixture(&format!("mc_{i:02}.json"))).unwrap(), &cfg))
        .collect();
    let logs = sweep(&scenes, &cfg, 150, 2).unwrap();
    let s = summarize(&logs).unwrap();
    let n_objects = logs.len() * 10;
    let tol = |p: f64, n: usize| 4.0 * (p * (1.0 - p) / n as f64).sqrt();
    let loc = s.localization.unwrap();
    assert!((loc - 0.925).abs() <= tol(0.925, n_objects), "localization {loc}");
    let cls = s.classification.unwrap();
    assert!((cls - 0.955).abs() <= tol(0.955, (n_objects as f64 * 0.9) as usize), "classification {cls}");
    let exe = s.execution.unwrap();
    assert!((exe - 0.962).abs() <= tol(0.962, (n_objects as f64 * 0.9) as usize), "execution {exe}");
    assert_eq!(s.anomalies, 0);
    // worker count does not change results
    let again = sweep(&scenes[..2], &cfg, 20, 1).unwrap();
    assert_eq!(again, sweep(&scenes[..2], &cfg, 20, 3).unwrap());
}

#[test]
fn measured_rates_give_eighty_five_percent() {
    let cfg = SimConfig::load(fixture("measured.json")).unwrap();
    let scenes: Vec<_> = (1..=8)
        .map(|i| scene(WorldFile::load(fixture(&format!("mc_{i:02}.json"))).unwrap(), &cfg))
        .collect();
    let s = summarize(&sweep(&scenes, &cfg, 300, 1).unwrap()).unwrap();
    assert_eq!(s.episodes, 2400);
    assert!((s.overall.mean - 0.850).abs() <= 0.020, "mean {}", s.overall.mean);
    // the product of the component rates
    let product = 0.925 * 0.955 * 0.962;
    assert!((s.overall.mean - product).abs() <= 4.0 * s.overall.std / (2400f64).sqrt());
}
