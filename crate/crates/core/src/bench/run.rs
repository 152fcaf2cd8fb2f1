//! Monte-Carlo sweeps.
//!
//! Every `(cell, trial)` pair draws its own dictionary and signal from seeds
//! derived from `(master_seed, cell, trial)`, and all algorithms run on that
//! same instance. Trials execute on the ambient rayon pool; results are
//! collected in grid order and reduced sequentially, so counts never depend on
//! the thread count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::spec::ExperimentSpec;
use crate::dictionary::{generate, DictionaryKind, DictionarySpec};
use crate::error::Result;
use crate::greedy::{run, Algorithm, GreedyConfig};
use crate::linalg::SensingMatrix;
use crate::rng::derive_seed;
use crate::signals::{measure, random_sparse_signal_with, SparseSignal};

/// Failure bucket for a completed run whose support is wrong.
pub const SUPPORT_MISMATCH: &str = "support_mismatch";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    #[serde(rename = "T")]
    pub t: f64,
    pub trials: usize,
    pub successes: usize,
    pub recovery_probability: f64,
    /// Over trials that ran to completion (errored trials excluded).
    pub mean_iterations: f64,
    /// Microseconds per completed iteration over timed trials, if timing was on.
    pub mean_runtime_us_per_iter: Option<f64>,
    pub failures_by_cause: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrialOutcome {
    Completed {
        recovered: bool,
        iterations: usize,
        runtime_us_per_iter: Option<f64>,
    },
    Failed(&'static str),
}

/// Iteration cap: `K`, reduced so that at most `m` indices can be selected.
pub fn iteration_cap(algorithm: &Algorithm, k: usize, m: usize) -> usize {
    k.min(m / algorithm.per_iteration()).max(1)
}

/// Run every algorithm on `y = Φx` and score exact support recovery.
pub fn score_instance(
    a: &SensingMatrix,
    x: &SparseSignal,
    algorithms: &[Algorithm],
    epsilon: f64,
    timed: bool,
) -> Vec<TrialOutcome> {
    let y = match measure(a, x) {
        Ok(y) => y,
        Err(e) => return vec![TrialOutcome::Failed(e.cause()); algorithms.len()],
    };
    algorithms
        .iter()
        .map(|alg| {
            let config = GreedyConfig::new(*alg, x.k())
                .with_epsilon(epsilon)
                .with_max_iterations(iteration_cap(alg, x.k(), a.m()));
            let start = Instant::now();
            match run(a, &y, &config) {
                Ok(result) => {
                    let elapsed = start.elapsed();
                    let iterations = result.iteration_count();
                    TrialOutcome::Completed {
                        recovered: &result.support_hat == x.support(),
                        iterations,
                        runtime_us_per_iter: (timed && iterations > 0)
                            .then(|| elapsed.as_secs_f64() * 1e6 / iterations as f64),
                    }
                }
                Err(e) => TrialOutcome::Failed(e.cause()),
            }
        })
        .collect()
}

fn run_trial(spec: &ExperimentSpec, cell: usize, trial: usize, m: usize, k: usize) -> Vec<TrialOutcome> {
    let path = [cell as u64, trial as u64];
    let dictionary = DictionarySpec {
        m,
        n: spec.n,
        kind: DictionaryKind::with_offset(spec.dictionary_t),
        seed: derive_seed(spec.master_seed, &[path[0], path[1], 0]),
    };
    let signal_seed = derive_seed(spec.master_seed, &[path[0], path[1], 1]);
    let instance = generate(&dictionary)
        .and_then(|a| random_sparse_signal_with(spec.n, k, signal_seed, spec.signal_values).map(|x| (a, x)));
    match instance {
        Ok((a, x)) => {
            let timed = spec.measure_runtime && trial >= spec.warmup_trials;
            score_instance(&a, &x, &spec.algorithms, spec.epsilon, timed)
        }
        Err(e) => vec![TrialOutcome::Failed(e.cause()); spec.algorithms.len()],
    }
}

fn aggregate(spec: &ExperimentSpec, m: usize, k: usize, alg: &Algorithm, outcomes: &[&TrialOutcome]) -> ExperimentRecord {
    let mut successes = 0;
    let mut completed = 0;
    let mut iteration_sum = 0usize;
    let mut runtimes = Vec::new();
    let mut failures_by_cause = BTreeMap::new();
    for outcome in outcomes {
        match outcome {
            TrialOutcome::Completed {
                recovered,
                iterations,
                runtime_us_per_iter,
            } => {
                completed += 1;
                iteration_sum += iterations;
                if *recovered {
                    successes += 1;
                } else {
                    *failures_by_cause.entry(SUPPORT_MISMATCH.to_string()).or_insert(0) += 1;
                }
                runtimes.extend(runtime_us_per_iter);
            }
            TrialOutcome::Failed(cause) => {
                *failures_by_cause.entry(cause.to_string()).or_insert(0) += 1;
            }
        }
    }
    let trials = outcomes.len();
    ExperimentRecord {
        algorithm: alg.name().to_string(),
        m,
        n: spec.n,
        k,
        big_n: alg.big_n(),
        l: alg.l(),
        t: spec.dictionary_t,
        trials,
        successes,
        recovery_probability: successes as f64 / trials as f64,
        mean_iterations: if completed == 0 { 0.0 } else { iteration_sum as f64 / completed as f64 },
        mean_runtime_us_per_iter: (!runtimes.is_empty())
            .then(|| runtimes.iter().sum::<f64>() / runtimes.len() as f64),
        failures_by_cause,
    }
}

/// One record per `(cell, algorithm)`, cells in grid order and algorithms in
/// spec order. Per-trial errors are tallied, never propagated.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>> {
    spec.validate()?;
    let cells = spec.sweep.cells();
    let total = cells.len() * spec.trials;
    let done = AtomicUsize::new(0);
    let step = (total / 10).max(1);

    let outcomes: Vec<Vec<TrialOutcome>> = (0..total)
        .into_par_iter()
        .map(|job| {
            let (cell, trial) = (job / spec.trials, job % spec.trials);
            let (m, k) = cells[cell];
            let out = run_trial(spec, cell, trial, m, k);
            let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
            if finished.is_multiple_of(step) || finished == total {
                log::info!("sweep progress: {finished}/{total} trials");
            }
            out
        })
        .collect();

    let mut records = Vec::with_capacity(cells.len() * spec.algorithms.len());
    for (cell, &(m, k)) in cells.iter().enumerate() {
        let rows = &outcomes[cell * spec.trials..(cell + 1) * spec.trials];
        for (slot, alg) in spec.algorithms.iter().enumerate() {
            let column: Vec<&TrialOutcome> = rows.iter().map(|r| &r[slot]).collect();
            records.push(aggregate(spec, m, k, alg, &column));
        }
    }
    Ok(records)
}

/// [`run_experiment`] on a dedicated pool with `threads` workers.
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: usize) -> Result<Vec<ExperimentRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::error::Error::ConfigInvalid(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(spec))
}
