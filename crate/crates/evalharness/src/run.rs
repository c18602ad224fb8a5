use rayon::prelude::*;
use tidyup_core::Dataset;

use crate::report::{BenchmarkReport, Task};
use crate::{score_primitives, score_scenario, HarnessError, MethodSpec, PreparedMethod};

fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    if workers == 0 {
        return Err(HarnessError::Config("workers must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

pub fn run_benchmark(
    ds: &Dataset,
    spec: &MethodSpec,
    workers: usize,
) -> Result<BenchmarkReport, HarnessError> {
    run_prepared(ds, &PreparedMethod::prepare(spec)?, workers)
}

/// Evaluate every scenario on `workers` threads. Method failures inside a
/// scenario become anomalies; only configuration problems are errors.
pub fn run_prepared(
    ds: &Dataset,
    method: &PreparedMethod,
    workers: usize,
) -> Result<BenchmarkReport, HarnessError> {
    method.check()?;
    let results = pool(workers)?.install(|| {
        ds.scenarios
            .par_iter()
            .map(|s| score_scenario(s, method.predict(s)))
            .collect()
    });
    Ok(BenchmarkReport::from_results(
        Task::Receptacle,
        method.kind,
        method.fingerprint(),
        results,
    ))
}

pub fn run_primitive_benchmark(
    ds: &Dataset,
    spec: &MethodSpec,
    workers: usize,
) -> Result<BenchmarkReport, HarnessError> {
    if let Some(s) = ds.scenarios.iter().find(|s| !s.has_primitives()) {
        return Err(HarnessError::MissingAnnotations(s.id.clone()));
    }
    run_prepared_primitives(ds, &PreparedMethod::prepare(spec)?, workers)
}

pub fn run_prepared_primitives(
    ds: &Dataset,
    method: &PreparedMethod,
    workers: usize,
) -> Result<BenchmarkReport, HarnessError> {
    if let Some(s) = ds.scenarios.iter().find(|s| !s.has_primitives()) {
        return Err(HarnessError::MissingAnnotations(s.id.clone()));
    }
    method.check_primitives()?;
    let results = pool(workers)?.install(|| {
        ds.scenarios
            .par_iter()
            .map(|s| score_primitives(s, method.predict_primitives(s)))
            .collect()
    });
    Ok(BenchmarkReport::from_results(
        Task::Primitive,
        method.kind,
        method.fingerprint(),
        results,
    ))
}
