//! WCDFP estimators under the revised critical instant.
//!
//! All estimators bound the same quantity for a target task `k`: the
//! probability that the aggregate demand
//! `S = C_k + Σ_i Σ_{j=1..⌈(t+D_i)/T_i⌉} C_{i,j}` over all strictly
//! higher-priority tasks `i` reaches the deadline, with failure defined as
//! `S >= t` (half-open truncation, erring on the safe side). The convolution
//! methods evaluate at `t = D_k`; the analytical tail bound additionally
//! searches over `t`.

mod berry_esseen;
mod convolution;
mod monte_carlo;

pub use berry_esseen::{be_bound_at, wcdfp_be};
pub use convolution::{
    wcdfp_ac_improved, wcdfp_ac_orig, wcdfp_ac_with_options, wcdfp_sc, AcOptions, AcReport,
    MergeOrder, TruncationPolicy,
};
pub use monte_carlo::{clopper_pearson, wcdfp_mc};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pmf::PmfError;
use crate::taskset::{Task, TaskSet};
use crate::time::TimeUnit;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("task {0} not present in the task set")]
    UnknownTask(u32),
    #[error("task set is empty")]
    EmptyTaskSet,
    #[error("sample count must be positive")]
    ZeroSamples,
    #[error(transparent)]
    Pmf(#[from] PmfError),
}

/// Estimator identifiers, named as in the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Sequential convolution, one job at a time in arrival order.
    Sc,
    /// Aggregate convolution, per-task powers folded in priority order.
    AcOrig,
    /// Aggregate convolution with size-ordered (Huffman) merging.
    AcImp,
    /// Monte Carlo sampling of the aggregate demand.
    Mc,
    /// Berry-Esseen analytical tail bound.
    Be,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Sc,
        Method::AcOrig,
        Method::AcImp,
        Method::Mc,
        Method::Be,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sc => "SC",
            Method::AcOrig => "AC_ORIG",
            Method::AcImp => "AC_IMP",
            Method::Mc => "MC",
            Method::Be => "BE",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SC" => Ok(Method::Sc),
            "AC_ORIG" => Ok(Method::AcOrig),
            "AC_IMP" => Ok(Method::AcImp),
            "MC" => Ok(Method::Mc),
            "BE" => Ok(Method::Be),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Per-method measurement details carried alongside the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Sum of operand support lengths over all merge convolutions
    /// (squaring steps excluded, so the figure is comparable across
    /// aggregate-convolution variants).
    pub merge_operand_sum: u64,
    /// Probability mass clamped away as negative transform round-off.
    pub lost_mass: f64,
    /// Half-width of the 95% confidence interval (sampling only).
    pub mc_halfwidth: Option<f64>,
    /// Minimizing evaluation point of the tail bound.
    pub be_t_star: Option<TimeUnit>,
}

impl Diagnostics {
    pub fn none() -> Diagnostics {
        Diagnostics {
            merge_operand_sum: 0,
            lost_mass: 0.0,
            mc_halfwidth: None,
            be_t_star: None,
        }
    }
}

/// One estimator's verdict on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub wcdfp: f64,
    pub method: Method,
    /// Wall-clock seconds spent inside the estimator.
    pub wall_time: f64,
    pub diagnostics: Diagnostics,
}

/// Number of jobs of a task with deadline `d` and period `period` that can
/// interfere within a window of length `t`: `⌈(t + d) / period⌉`.
pub fn release_count(d: TimeUnit, period: TimeUnit, t: TimeUnit) -> u64 {
    (t + d).div_ceil_by(period)
}

/// The revised-critical-instant release pattern for one target task: the
/// target contributes a single job, every strictly higher-priority task
/// contributes `release_count` jobs, lower-priority tasks none.
#[derive(Debug, Clone)]
pub struct ReleaseModel<'a> {
    pub target: &'a Task,
    /// Higher-priority tasks in descending priority order with job counts.
    pub interferers: Vec<(&'a Task, u64)>,
    /// Window length `t` the counts were computed for.
    pub horizon: TimeUnit,
}

impl<'a> ReleaseModel<'a> {
    /// Release model at window length `t`.
    pub fn at(ts: &'a TaskSet, target: u32, t: TimeUnit) -> Result<Self, AnalysisError> {
        if ts.tasks.is_empty() {
            return Err(AnalysisError::EmptyTaskSet);
        }
        let target = ts.task(target).ok_or(AnalysisError::UnknownTask(target))?;
        let interferers = ts
            .higher_priority(target)
            .map(|task| (task, release_count(task.deadline, task.period, t)))
            .collect();
        Ok(ReleaseModel {
            target,
            interferers,
            horizon: t,
        })
    }

    /// Release model at the target's deadline, the evaluation point shared
    /// by all convolution estimators.
    pub fn at_deadline(ts: &'a TaskSet, target: u32) -> Result<Self, AnalysisError> {
        let deadline = ts
            .task(target)
            .ok_or(AnalysisError::UnknownTask(target))?
            .deadline;
        Self::at(ts, target, deadline)
    }

    pub fn total_jobs(&self) -> u64 {
        1 + self.interferers.iter().map(|&(_, k)| k).sum::<u64>()
    }
}
