use rayon::prelude::*;
use serde::Serialize;

use crate::episode::{EpisodeLog, Scene, SimConfig};
use crate::rules::RuleTable;
use crate::SimError;

/// Mean with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95: (f64, f64),
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Option<Self> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std = var.sqrt();
        let half = 1.96 * std / (n as f64).sqrt();
        Some(Self {
            n,
            mean,
            std,
            ci95: (mean - half, mean + half),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub episodes: usize,
    pub overall: Estimate,
    /// Pooled over all objects in all episodes.
    pub localization: Option<f64>,
    pub classification: Option<f64>,
    pub execution: Option<f64>,
    pub per_world: Vec<(String, Estimate)>,
    pub anomalies: usize,
}

/// Seed used for episode `k` of world `w`.
pub fn episode_seed(base: u64, world: usize, seeds: u64, k: u64) -> u64 {
    base.wrapping_add(world as u64 * seeds + k)
}

/// Run `seeds` episodes on every scene. Episodes are independent and run on
/// `workers` threads; results come back in (scene, seed) order.
pub fn sweep(
    scenes: &[(Scene, RuleTable)],
    cfg: &SimConfig,
    seeds: u64,
    workers: usize,
) -> Result<Vec<EpisodeLog>, SimError> {
    cfg.validate()?;
    if workers == 0 {
        return Err(SimError::Config("workers must be at least 1".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..scenes.len())
        .flat_map(|w| (0..seeds).map(move |k| (w, k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(w, k)| {
                let (scene, table) = &scenes[w];
                let cfg = SimConfig {
                    rng_seed: episode_seed(cfg.rng_seed, w, seeds, k),
                    ..cfg.clone()
                };
                scene.run(table, &cfg, None)
            })
            .collect()
    })
}

pub fn summarize(logs: &[EpisodeLog]) -> Option<SweepSummary> {
    let overall = Estimate::of(&logs.iter().map(|l| l.overall).collect::<Vec<_>>())?;
    let pooled = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    let objs = || logs.iter().flat_map(|l| &l.objects);
    let total = objs().count();
    let localized = objs().filter(|r| r.localized).count();
    let classified = objs().filter(|r| r.predicted_category.is_some()).count();
    let right = objs()
        .filter(|r| {
            r.predicted_category.as_ref().map(|c| c.normalized()) == Some(r.category.normalized())
        })
        .count();
    let attempts: u32 = objs().map(|r| r.attempts).sum();
    let successes: u32 = objs().map(|r| r.successes).sum();
    let mut names: Vec<String> = Vec::new();
    for l in logs {
        if !names.contains(&l.world) {
            names.push(l.world.clone());
        }
    }
    let per_world = names
        .into_iter()
        .filter_map(|n| {
            let xs: Vec<f64> = logs.iter().filter(|l| l.world == n).map(|l| l.overall).collect();
            Estimate::of(&xs).map(|e| (n, e))
        })
        .collect();
    Some(SweepSummary {
        episodes: logs.len(),
        overall,
        localization: pooled(localized, total),
        classification: pooled(right, classified),
        execution: pooled(successes as usize, attempts as usize),
        per_world,
        anomalies: logs.iter().map(|l| l.anomalies.len()).sum(),
    })
}
