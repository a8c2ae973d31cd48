//! Sporadic task model and synthetic task-set generation.

mod generator;
mod io;

pub use generator::{
    assign_rm_priorities, build_execution_pmf, derive_wcet, generate_periods, generate_taskset,
    generate_utilizations, normalized_mixture_mean, MixtureParams, WcetMode,
};
pub use io::{load_taskset, save_taskset, SCHEMA_VERSION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pmf::{Pmf, PmfError, MASS_TOLERANCE};
use crate::time::TimeUnit;

#[derive(Debug, Error)]
pub enum TaskSetError {
    #[error("period range is empty or non-positive: [{min}, {max}] s")]
    EmptyRange { min: f64, max: f64 },
    #[error("total utilization {total} infeasible for {n} tasks")]
    InfeasibleTotal { total: f64, n: usize },
    #[error("derived wcet for utilization {utilization} and period {period} is below one tick")]
    WcetBelowResolution { utilization: f64, period: TimeUnit },
    #[error("schema version {found} unsupported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("task set invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Pmf(#[from] PmfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A sporadic task: minimum inter-arrival `period`, relative `deadline`
/// (constrained, `deadline <= period`), fixed `priority` (larger value means
/// higher priority), and an execution-time distribution bounded by `wcet`.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: u32,
    pub period: TimeUnit,
    pub deadline: TimeUnit,
    pub priority: u32,
    pub wcet: TimeUnit,
    pub exec_pmf: Pmf,
}

/// A task set on a common grid of `gamma` seconds per tick, tasks sorted by
/// descending priority.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSet {
    pub tasks: Vec<Task>,
    pub gamma: f64,
    pub seed: u64,
    pub config_hash: Option<String>,
}

impl TaskSet {
    /// Sorts by descending priority and checks every invariant.
    pub fn new(
        mut tasks: Vec<Task>,
        gamma: f64,
        seed: u64,
        config_hash: Option<String>,
    ) -> Result<TaskSet, TaskSetError> {
        tasks.sort_by_key(|t| std::cmp::Reverse(t.priority));
        let ts = TaskSet {
            tasks,
            gamma,
            seed,
            config_hash,
        };
        ts.validate()?;
        Ok(ts)
    }

    pub fn validate(&self) -> Result<(), TaskSetError> {
        let fail = |msg: String| Err(TaskSetError::InvariantViolation(msg));
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return fail(format!("gamma must be positive, got {}", self.gamma));
        }
        for pair in self.tasks.windows(2) {
            if pair[0].priority <= pair[1].priority {
                return fail(format!(
                    "tasks {} and {} break strict descending priority order",
                    pair[0].id, pair[1].id
                ));
            }
        }
        for task in &self.tasks {
            if task.deadline > task.period {
                return fail(format!(
                    "task {} has deadline {} beyond period {}",
                    task.id, task.deadline, task.period
                ));
            }
            if task.deadline.ticks() == 0 {
                return fail(format!("task {} has a zero deadline", task.id));
            }
            let mass = task.exec_pmf.total_mass();
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return fail(format!(
                    "task {} execution distribution has mass {mass}",
                    task.id
                ));
            }
            if let Some(max) = task.exec_pmf.max_support() {
                if max > task.wcet {
                    return fail(format!(
                        "task {} execution support {} exceeds wcet {}",
                        task.id, max, task.wcet
                    ));
                }
            }
        }
        let mut ids: Vec<u32> = self.tasks.iter().map(|t| t.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.tasks.len() {
            return fail("duplicate task ids".into());
        }
        Ok(())
    }

    pub fn task(&self, id: u32) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Tasks with strictly higher priority than `task`, in descending order.
    pub fn higher_priority(&self, task: &Task) -> impl Iterator<Item = &Task> {
        let cutoff = task.priority;
        self.tasks.iter().filter(move |t| t.priority > cutoff)
    }

    /// The task suffering maximal interference.
    pub fn lowest_priority_task(&self) -> Option<&Task> {
        self.tasks.last()
    }

    pub fn total_utilization(&self) -> f64 {
        self.tasks
            .iter()
            .map(|t| t.wcet.ticks() as f64 / t.period.ticks() as f64)
            .sum()
    }
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_tasks: usize,
    pub total_utilization: f64,
    /// Period range in seconds, inclusive.
    pub period_range: (f64, f64),
    pub mixture: MixtureParams,
    /// Grid resolution in seconds per tick.
    pub gamma: f64,
    pub wcet_mode: WcetMode,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_tasks: 10,
            total_utilization: 0.65,
            period_range: (0.010, 1.0),
            mixture: MixtureParams::default(),
            gamma: 1e-6,
            wcet_mode: WcetMode::WcetUtilization,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    /// Stable hash of the full configuration, recorded in generated sets so
    /// results can be traced back to their parameters.
    pub fn hash_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
