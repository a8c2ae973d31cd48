//! Batch experiment runner: a grid of (cardinality, utilization, set index)
//! cells, each generating one task set from a derived seed and timing the
//! selected estimators on it.
//!
//! All probability outputs are deterministic functions of the configuration;
//! only wall times vary between runs. Rows are computed in parallel across a
//! worker pool capped by the `PRTA_THREADS` environment variable and then
//! sorted, so the emitted table is independent of scheduling order.

use rayon::prelude::*;

use prta_core::analysis::{
    wcdfp_ac_improved, wcdfp_ac_orig, wcdfp_be, wcdfp_mc, wcdfp_sc, AnalysisResult, Method,
};
use prta_core::taskset::{generate_taskset, GeneratorConfig, TaskSet, TaskSetError};

use crate::table::{HarnessError, ResultRow, ResultTable, RowFailure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetPolicy {
    /// Analyze only the task suffering maximal interference.
    LowestPriority,
    /// One row group per task in the set.
    AllTasks,
    /// A fixed task id, present in every generated set.
    Explicit(u32),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub cardinalities: Vec<u32>,
    pub utilizations: Vec<f64>,
    pub sets_per_cell: u32,
    pub methods: Vec<Method>,
    pub mc_samples: u64,
    pub seed: u64,
    /// Resolution in seconds.
    pub gamma: f64,
    pub target_policy: TargetPolicy,
    /// Median-of-k timing; probabilities come from the first run.
    pub repeat: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cardinalities: vec![10],
            utilizations: vec![0.65],
            sets_per_cell: 10,
            methods: Method::ALL.to_vec(),
            mc_samples: 100_000,
            seed: 0,
            gamma: 1e-6,
            target_policy: TargetPolicy::LowestPriority,
            repeat: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sets_per_cell == 0 {
            return Err(HarnessError::InvalidConfig(
                "sets_per_cell must be ≥ 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "methods must be non-empty".into(),
            ));
        }
        if self.cardinalities.is_empty() || self.utilizations.is_empty() {
            return Err(HarnessError::InvalidConfig(
                "cardinalities and utilizations must be non-empty".into(),
            ));
        }
        if self.repeat == 0 {
            return Err(HarnessError::InvalidConfig("repeat must be ≥ 1".into()));
        }
        Ok(())
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Stable per-cell seed: independent of which other cells the grid contains.
pub fn derived_seed(root: u64, n: u32, utilization: f64, set_idx: u32) -> u64 {
    let mut h = splitmix64(root ^ u64::from(n));
    h = splitmix64(h ^ utilization.to_bits());
    splitmix64(h ^ u64::from(set_idx))
}

pub fn taskset_id(n: u32, utilization: f64, set_idx: u32) -> String {
    format!("n{n:03}-u{utilization:.4}-s{set_idx:03}")
}

/// Worker pool capped by `PRTA_THREADS` (all cores when unset or invalid).
pub fn worker_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = std::env::var("PRTA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
    {
        builder = builder.num_threads(threads);
    }
    builder.build().expect("worker pool")
}

/// Generates the task set for one cell. A draw whose smallest utilization
/// share rounds below one tick of execution time is rejected by the
/// generator; such draws are retried with a salted seed so every cell still
/// yields a set (the retry count is deterministic).
pub fn generate_cell_taskset(
    n: u32,
    utilization: f64,
    set_idx: u32,
    root_seed: u64,
    gamma: f64,
) -> Result<TaskSet, TaskSetError> {
    let base = derived_seed(root_seed, n, utilization, set_idx);
    let mut last_err = None;
    for attempt in 0..64 {
        let config = GeneratorConfig {
            n_tasks: n as usize,
            total_utilization: utilization,
            gamma,
            seed: splitmix64(base ^ attempt),
            ..GeneratorConfig::default()
        };
        match generate_taskset(&config) {
            Ok(ts) => return Ok(ts),
            Err(e @ TaskSetError::WcetBelowResolution { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("retry loop only exits on error"))
}

/// Runs one estimator on one target task.
pub fn run_method(
    ts: &TaskSet,
    target: u32,
    method: Method,
    mc_samples: u64,
) -> Result<AnalysisResult, prta_core::AnalysisError> {
    match method {
        Method::Sc => wcdfp_sc(ts, target),
        Method::AcOrig => wcdfp_ac_orig(ts, target),
        Method::AcImp => wcdfp_ac_improved(ts, target),
        Method::Mc => wcdfp_mc(ts, target, mc_samples, ts.seed),
        Method::Be => wcdfp_be(ts, target),
    }
}

/// `run_method` with median-of-k wall time (k = `repeat`); the estimate
/// itself is taken from the first run, to which the others are identical.
fn run_method_timed(
    ts: &TaskSet,
    target: u32,
    method: Method,
    mc_samples: u64,
    repeat: u32,
) -> Result<AnalysisResult, prta_core::AnalysisError> {
    let mut first = run_method(ts, target, method, mc_samples)?;
    if repeat > 1 {
        let mut walls = vec![first.wall_time];
        for _ in 1..repeat {
            walls.push(run_method(ts, target, method, mc_samples)?.wall_time);
        }
        walls.sort_by(f64::total_cmp);
        first.wall_time = walls[walls.len() / 2];
    }
    Ok(first)
}

fn targets_of(ts: &TaskSet, policy: TargetPolicy) -> Vec<u32> {
    match policy {
        TargetPolicy::LowestPriority => ts
            .lowest_priority_task()
            .map(|t| vec![t.id])
            .unwrap_or_default(),
        TargetPolicy::AllTasks => ts.tasks.iter().map(|t| t.id).collect(),
        TargetPolicy::Explicit(id) => vec![id],
    }
}

fn run_cell(cfg: &ExperimentConfig, n: u32, utilization: f64, set_idx: u32) -> ResultTable {
    let id = taskset_id(n, utilization, set_idx);
    let mut out = ResultTable::default();
    let ts = match generate_cell_taskset(n, utilization, set_idx, cfg.seed, cfg.gamma) {
        Ok(ts) => ts,
        Err(e) => {
            out.failures.push(RowFailure {
                taskset_id: id,
                method: None,
                message: e.to_string(),
            });
            return out;
        }
    };
    for target in targets_of(&ts, cfg.target_policy) {
        for &method in &cfg.methods {
            match run_method_timed(&ts, target, method, cfg.mc_samples, cfg.repeat) {
                Ok(result) => out.rows.push(ResultRow {
                    taskset_id: id.clone(),
                    n,
                    utilization,
                    target,
                    method,
                    wcdfp: result.wcdfp,
                    wall_time_s: result.wall_time,
                    merge_operand_sum: result.diagnostics.merge_operand_sum,
                    lost_mass: result.diagnostics.lost_mass,
                    mc_halfwidth: result.diagnostics.mc_halfwidth,
                }),
                Err(e) => out.failures.push(RowFailure {
                    taskset_id: id.clone(),
                    method: Some(method),
                    message: e.to_string(),
                }),
            }
        }
    }
    out
}

/// Runs the full grid. Per-row failures are collected, not fatal; the row
/// order of the result is a pure function of the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable, HarnessError> {
    cfg.validate()?;

    let mut cells = Vec::new();
    for &n in &cfg.cardinalities {
        for &u in &cfg.utilizations {
            for set_idx in 0..cfg.sets_per_cell {
                cells.push((n, u, set_idx));
            }
        }
    }

    let pool = worker_pool();
    let partials: Vec<ResultTable> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, u, s)| run_cell(cfg, n, u, s))
            .collect()
    });

    let mut table = ResultTable::default();
    for mut partial in partials {
        table.rows.append(&mut partial.rows);
        table.failures.append(&mut partial.failures);
    }
    let method_rank = |m: Method| {
        Method::ALL
            .iter()
            .position(|&x| x == m)
            .expect("known method")
    };
    table.rows.sort_by(|a, b| {
        (&a.taskset_id, a.target, method_rank(a.method)).cmp(&(
            &b.taskset_id,
            b.target,
            method_rank(b.method),
        ))
    });
    table.failures.sort_by(|a, b| {
        (&a.taskset_id, a.method.map(method_rank)).cmp(&(&b.taskset_id, b.method.map(method_rank)))
    });
    Ok(table)
}

/// Convenience used by timing comparisons: median of a slice.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}
