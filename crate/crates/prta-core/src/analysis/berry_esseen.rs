//! Berry-Esseen analytical tail bound.
//!
//! For a window length `t`, the demand `S` is a sum of independent job
//! execution times, so `P[S >= t] = 1 - F_S(t - γ)` is bounded by the normal
//! tail at the standardized point plus the Berry-Esseen error
//! `c0 · Σ E|X_j - E X_j|³ / V^{3/2}`. The bound is evaluated over every
//! window length where the release pattern changes (within a constant
//! pattern the bound is smallest at the segment's right edge) and the
//! smallest value wins.

use std::time::Instant;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{release_count, AnalysisError, AnalysisResult, Diagnostics, Method, ReleaseModel};
use crate::pmf::Moments;
use crate::taskset::TaskSet;
use crate::time::TimeUnit;

/// Best published constant for sums of independent, non-identically
/// distributed summands.
const C0: f64 = 0.5600;

struct TaskMoments {
    deadline: u64,
    period: u64,
    moments: Moments,
}

fn interferer_moments(model: &ReleaseModel) -> Result<Vec<TaskMoments>, AnalysisError> {
    model
        .interferers
        .iter()
        .map(|&(task, _)| {
            Ok(TaskMoments {
                deadline: task.deadline.ticks(),
                period: task.period.ticks(),
                // tick units: the standardized quantities are scale-free
                moments: task.exec_pmf.moments(1.0)?,
            })
        })
        .collect()
}

fn bound_at(target: &Moments, interferers: &[TaskMoments], t: u64) -> f64 {
    let mut mean = target.mean;
    let mut var = target.variance;
    let mut rho3 = target.rho3;
    for tm in interferers {
        let k = release_count(TimeUnit(tm.deadline), TimeUnit(tm.period), TimeUnit(t)) as f64;
        mean += k * tm.moments.mean;
        var += k * tm.moments.variance;
        rho3 += k * tm.moments.rho3;
    }
    if var == 0.0 {
        // deterministic demand: the tail is an indicator
        return if mean >= t as f64 { 1.0 } else { 0.0 };
    }
    // failure is S >= t, i.e. S > t - 1 on the tick lattice
    let t_eff = (t - 1) as f64;
    let std_normal = Normal::standard();
    let tail = 1.0 - std_normal.cdf((t_eff - mean) / var.sqrt());
    (tail + C0 * rho3 / var.powf(1.5)).clamp(0.0, 1.0)
}

/// The tail bound at one explicit window length `t`, without the grid
/// search. Useful to compare against convolution at the matched point.
pub fn be_bound_at(ts: &TaskSet, target: u32, t: TimeUnit) -> Result<f64, AnalysisError> {
    let model = ReleaseModel::at(ts, target, t)?;
    let target_moments = model.target.exec_pmf.moments(1.0)?;
    let interferers = interferer_moments(&model)?;
    Ok(bound_at(&target_moments, &interferers, t.ticks()))
}

pub fn wcdfp_be(ts: &TaskSet, target: u32) -> Result<AnalysisResult, AnalysisError> {
    let started = Instant::now();
    let model = ReleaseModel::at_deadline(ts, target)?;
    let deadline = model.horizon.ticks();
    let target_moments = model.target.exec_pmf.moments(1.0)?;
    let interferers = interferer_moments(&model)?;

    // candidate window lengths: the deadline plus every point where some
    // release count is about to increment (segment right edges)
    let mut grid: Vec<u64> = vec![deadline];
    for tm in &interferers {
        let mut m = 1u64;
        loop {
            let edge = m * tm.period;
            if edge <= tm.deadline {
                m += 1;
                continue;
            }
            let t = edge - tm.deadline;
            if t >= deadline {
                break;
            }
            grid.push(t);
            m += 1;
        }
    }
    grid.sort_unstable();
    grid.dedup();

    let mut best = f64::INFINITY;
    let mut best_t = deadline;
    for &t in &grid {
        let b = bound_at(&target_moments, &interferers, t);
        if b < best {
            best = b;
            best_t = t;
        }
    }

    Ok(AnalysisResult {
        wcdfp: best.clamp(0.0, 1.0),
        method: Method::Be,
        wall_time: started.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            be_t_star: Some(TimeUnit(best_t)),
            ..Diagnostics::none()
        },
    })
}
