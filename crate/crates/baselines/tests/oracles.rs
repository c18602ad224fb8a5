//! Nearest-neighbor baselines checked against brute-force oracles.

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tidyup_baselines::*;
use tidyup_core::{ObjectName, Placement, ReceptacleName, RoomType, Scenario};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/baselines").join(name)
}

fn edges_of(path: &PathBuf) -> Vec<(String, String)> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (a, b) = l.split_once('\t').unwrap();
            (a.to_string(), b.to_string())
        })
        .collect()
}

/// Frontier expansion that rescans the whole edge list every level.
fn bfs_oracle(edges: &[(String, String)], a: &str, b: &str) -> Option<u32> {
    let mut visited: BTreeSet<&str> = BTreeSet::from([a]);
    let mut frontier = visited.clone();
    let mut level = 0;
    loop {
        if frontier.contains(b) {
            return Some(level);
        }
        let mut next = BTreeSet::new();
        for (x, y) in edges {
            for (u, v) in [(x.as_str(), y.as_str()), (y.as_str(), x.as_str())] {
                if frontier.contains(u) && !visited.contains(v) {
                    next.insert(v);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        visited.extend(next.iter().copied());
        frontier = next;
        level += 1;
    }
}

fn floyd_warshall(nodes: &[&str], edges: &[(String, String)]) -> Vec<Vec<u32>> {
    let n = nodes.len();
    let idx = |s: &str| nodes.iter().position(|x| *x == s).unwrap();
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for (a, b) in edges {
        let (i, j) = (idx(a), idx(b));
        d[i][j] = 1;
        d[j][i] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    d
}

fn load_graph() -> TaxonomyGraph {
    TaxonomyGraph::load(
        &fixture("taxonomy_edges.tsv"),
        Some(&fixture("taxonomy_synonyms.tsv")),
    )
    .unwrap()
}

#[test]
fn fixture_taxonomy_has_thirty_concepts() {
    assert_eq!(load_graph().len(), 30);
}

#[test]
fn distance_matches_bfs_oracle_on_200_pairs() {
    let g = load_graph();
    let edges = edges_of(&fixture("taxonomy_edges.tsv"));
    let nodes: Vec<&str> = g.concepts().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let a = nodes[rng.random_range(0..nodes.len())];
        let b = nodes[rng.random_range(0..nodes.len())];
        assert_eq!(taxonomy_distance(&g, a, b).ok(), bfs_oracle(&edges, a, b), "{a} {b}");
    }
}

#[test]
fn random_20_node_graph_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let names: Vec<String> = (0..20).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for i in 1..20 {
        // sparse forest plus chords; some components stay disconnected
        if rng.random_bool(0.85) {
            edges.push((names[rng.random_range(0..i)].clone(), names[i].clone()));
        }
    }
    for _ in 0..6 {
        let (a, b) = (rng.random_range(0..20), rng.random_range(0..20));
        if a != b {
            edges.push((names[a].clone(), names[b].clone()));
        }
    }
    let mut pairs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    // isolated nodes still need to exist, give each a private partner
    let extra: Vec<(String, String)> = names.iter().map(|n| (n.clone(), format!("{n}_leaf"))).collect();
    pairs.extend(extra.iter().map(|(a, b)| (a.as_str(), b.as_str())));
    let all: Vec<(String, String)> = edges.iter().cloned().chain(extra.iter().cloned()).collect();
    let g = TaxonomyGraph::from_edges(pairs).unwrap();
    for _ in 0..10 {
        let a = &names[rng.random_range(0..20)];
        let b = &names[rng.random_range(0..20)];
        assert_eq!(taxonomy_distance(&g, a, b).ok(), bfs_oracle(&all, a, b));
    }
}

#[test]
fn distance_is_a_metric_on_the_fixture() {
    let g = load_graph();
    let edges = edges_of(&fixture("taxonomy_edges.tsv"));
    let nodes: Vec<&str> = g.concepts().collect();
    let fw = floyd_warshall(&nodes, &edges);
    let d: Vec<Vec<u32>> = nodes
        .iter()
        .map(|a| nodes.iter().map(|b| taxonomy_distance(&g, a, b).unwrap()).collect())
        .collect();
    assert_eq!(d, fw);
    let n = nodes.len();
    for i in 0..n {
        assert_eq!(d[i][i], 0);
        for j in 0..n {
            assert_eq!(d[i][j], d[j][i]);
            assert_eq!(d[i][j] == 0, i == j);
            for k in 0..n {
                assert!(d[i][k] <= d[i][j] + d[j][k]);
            }
        }
    }
}

fn name(s: &str) -> ObjectName {
    ObjectName::new(s).unwrap()
}

fn rec(s: &str) -> ReceptacleName {
    ReceptacleName::new(s).unwrap()
}

fn scenario(seen: Vec<(ObjectName, ReceptacleName)>, unseen: Vec<(ObjectName, ReceptacleName)>) -> Scenario {
    let mut receptacles: Vec<ReceptacleName> = Vec::new();
    for (_, r) in seen.iter().chain(&unseen) {
        if !receptacles.contains(r) {
            receptacles.push(r.clone());
        }
    }
    let pl = |v: Vec<(ObjectName, ReceptacleName)>| {
        v.into_iter().map(|(o, r)| Placement::new(o, r)).collect()
    };
    Scenario {
        id: "s".into(),
        room_type: RoomType::Bedroom,
        receptacles,
        seen: pl(seen),
        unseen: pl(unseen),
        seen_primitives: None,
        unseen_primitives: None,
        criteria: BTreeSet::new(),
    }
}

/// Random scenario over concept names: distinct objects, receptacles r0..r3.
fn random_scenario(rng: &mut ChaCha8Rng, pool: &[String], n_seen: usize, n_unseen: usize) -> Scenario {
    let mut objs = pool.to_vec();
    objs.shuffle(rng);
    let mut draw = |o: &String| (name(o), rec(&format!("r{}", rng.random_range(0..4))));
    let seen = objs[..n_seen].iter().map(&mut draw).collect();
    let unseen = objs[n_seen..n_seen + n_unseen].iter().map(&mut draw).collect();
    scenario(seen, unseen)
}

fn argmin_oracle(scores: &[u32]) -> usize {
    let best = *scores.iter().min().unwrap();
    scores.iter().position(|&s| s == best).unwrap()
}

#[test]
fn taxonomy_predict_matches_exhaustive_scan() {
    let g = load_graph();
    let m = NameMapping::load(&fixture("name_mapping.tsv"), &g).unwrap();
    let edges = edges_of(&fixture("taxonomy_edges.tsv"));
    let pool: Vec<String> = g.concepts().map(String::from).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..50 {
        let s = random_scenario(&mut rng, &pool, 6, 3);
        for target in &s.unseen {
            let scores: Vec<u32> = s
                .seen
                .iter()
                .map(|p| bfs_oracle(&edges, target.object.as_str(), p.object.as_str()).unwrap())
                .collect();
            let want = &s.seen[argmin_oracle(&scores)].receptacle;
            assert_eq!(&taxonomy_predict(&s, &g, &m, &target.object).unwrap(), want);
        }
    }
}

#[test]
fn taxonomy_predict_small_cases() {
    let g = load_graph();
    let m = NameMapping::load(&fixture("name_mapping.tsv"), &g).unwrap();
    let s = scenario(
        vec![
            (name("yellow shirt"), rec("closet")),
            (name("orange soda"), rec("fridge")),
        ],
        vec![(name("beige shirt"), rec("closet"))],
    );
    // same concept wins
    assert_eq!(taxonomy_predict(&s, &g, &m, &name("beige shirt")).unwrap(), rec("closet"));
    // synonyms resolve through the graph index
    assert_eq!(taxonomy_predict(&s, &g, &m, &name("T-Shirt")).unwrap(), rec("closet"));
    // apple reaches soda in 4 hops and shirt in 6
    assert_eq!(taxonomy_predict(&s, &g, &m, &name("red apple")).unwrap(), rec("fridge"));
    // ties go to the earlier seen object
    let tie = scenario(
        vec![(name("sock"), rec("drawer")), (name("jacket"), rec("closet"))],
        vec![],
    );
    assert_eq!(taxonomy_predict(&tie, &g, &m, &name("pants")).unwrap(), rec("drawer"));
    assert!(matches!(
        taxonomy_predict(&s, &g, &m, &name("hovercraft")),
        Err(TaxonomyError::UnmappedName(n)) if n == "hovercraft"
    ));
}

#[test]
fn mapping_rejects_unknown_concepts() {
    let g = load_graph();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.tsv");
    std::fs::write(&path, "red shirt\tshirt\nspaceship\tvehicle\n").unwrap();
    let err = NameMapping::load(&path, &g).unwrap_err();
    assert!(matches!(err, TaxonomyError::Format { line: 2, .. }), "{err}");
}

fn naive_cosine(u: &[f64], v: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for i in 0..u.len() {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    dot / (nu.sqrt() * nv.sqrt())
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn cosine_matches_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let dim = rng.random_range(1..64);
        let (u, v) = (random_vec(&mut rng, dim), random_vec(&mut rng, dim));
        let got = cosine_similarity(&u, &v).unwrap();
        assert!((got - naive_cosine(&u, &v)).abs() <= 1e-12);
        assert!((-1.0..=1.0).contains(&got));
    }
}

#[test]
fn embedding_predict_matches_full_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pool: Vec<String> = (0..40).map(|i| format!("object {i}")).collect();
    for round in 0..50 {
        let dim = 2 + round % 6;
        let table = EmbeddingTable::new(pool.iter().map(|n| (n, random_vec(&mut rng, dim)))).unwrap();
        let s = random_scenario(&mut rng, &pool, 6, 3);
        for target in &s.unseen {
            let t = table.get(&target.object).unwrap();
            let sims: Vec<f64> = s
                .seen
                .iter()
                .map(|p| naive_cosine(t, table.get(&p.object).unwrap()))
                .collect();
            let best = sims.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let want = &s.seen[sims.iter().position(|&x| x == best).unwrap()].receptacle;
            assert_eq!(&embedding_predict(&s, &table, &target.object).unwrap(), want);
        }
    }
}

#[test]
fn embedding_fixture_cases() {
    let table = EmbeddingTable::load(&fixture("embeddings.tsv")).unwrap();
    assert_eq!(table.dim(), 4);
    let s = scenario(
        vec![
            (name("yellow shirt"), rec("drawer")),
            (name("white socks"), rec("closet")),
            (name("orange soda"), rec("fridge")),
        ],
        vec![],
    );
    assert_eq!(embedding_predict(&s, &table, &name("yellow shirt")).unwrap(), rec("drawer"));
    assert_eq!(embedding_predict(&s, &table, &name("navy socks")).unwrap(), rec("closet"));
    assert_eq!(embedding_predict(&s, &table, &name("apple juice")).unwrap(), rec("fridge"));
    assert!(matches!(
        embedding_predict(&s, &table, &name("rain jacket")),
        Err(EmbeddingError::MissingEmbedding(_))
    ));

    // orthogonal axes with known ordering
    let t = EmbeddingTable::new([
        ("a", vec![1.0, 0.0, 0.0]),
        ("b", vec![0.0, 1.0, 0.0]),
        ("c", vec![0.0, 0.0, 1.0]),
        ("q", vec![0.2, 0.7, 0.1]),
        ("tie", vec![1.0, 1.0, 0.0]),
    ])
    .unwrap();
    let s = scenario(
        vec![(name("a"), rec("x")), (name("b"), rec("y")), (name("c"), rec("z"))],
        vec![],
    );
    assert_eq!(embedding_predict(&s, &t, &name("q")).unwrap(), rec("y"));
    assert_eq!(embedding_predict(&s, &t, &name("tie")).unwrap(), rec("x"));
}

proptest! {
    #[test]
    fn predictors_ignore_unseen_order(seed in any::<u64>()) {
        let g = load_graph();
        let m = NameMapping::default();
        let pool: Vec<String> = g.concepts().map(String::from).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = EmbeddingTable::new(pool.iter().map(|n| (n, random_vec(&mut rng, 5)))).unwrap();
        let s = random_scenario(&mut rng, &pool, 5, 4);
        let mut shuffled = s.clone();
        shuffled.unseen.shuffle(&mut rng);
        for t in &s.unseen {
            prop_assert_eq!(
                taxonomy_predict(&s, &g, &m, &t.object).unwrap(),
                taxonomy_predict(&shuffled, &g, &m, &t.object).unwrap()
            );
            prop_assert_eq!(
                embedding_predict(&s, &table, &t.object).unwrap(),
                embedding_predict(&shuffled, &table, &t.object).unwrap()
            );
        }
    }

    #[test]
    fn embedding_predict_is_scale_invariant(seed in any::<u64>(), exp in -20i32..20) {
        let pool: Vec<String> = (0..12).map(|i| format!("o{i}")).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vecs: Vec<Vec<f64>> = pool.iter().map(|_| random_vec(&mut rng, 4)).collect();
        let s = random_scenario(&mut rng, &pool, 6, 3);
        let k = rng.random_range(0..pool.len());
        let scale = 2f64.powi(exp);
        let base = EmbeddingTable::new(pool.iter().zip(vecs.clone())).unwrap();
        let scaled = EmbeddingTable::new(pool.iter().zip(vecs).enumerate().map(|(i, (n, v))| {
            (n, if i == k { v.iter().map(|x| x * scale).collect() } else { v })
        }))
        .unwrap();
        for t in &s.unseen {
            prop_assert_eq!(
                embedding_predict(&s, &base, &t.object).unwrap(),
                embedding_predict(&s, &scaled, &t.object).unwrap()
            );
        }
    }

    #[test]
    fn seen_order_only_matters_for_ties(seed in any::<u64>()) {
        // with distinct similarity scores, reordering seen objects changes nothing
        let pool: Vec<String> = (0..15).map(|i| format!("o{i}")).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = EmbeddingTable::new(pool.iter().map(|n| (n, random_vec(&mut rng, 6)))).unwrap();
        let s = random_scenario(&mut rng, &pool, 6, 3);
        let mut reordered = s.clone();
        reordered.seen.reverse();
        for t in &s.unseen {
            prop_assert_eq!(
                embedding_predict(&s, &table, &t.object).unwrap(),
                embedding_predict(&reordered, &table, &t.object).unwrap()
            );
        }
    }
}
