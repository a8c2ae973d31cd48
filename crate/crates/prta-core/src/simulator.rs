//! Discrete-time preemptive fixed-priority scheduler with deadline aborts.
//!
//! The simulator provides empirical evidence from below for the analytical
//! bounds: it executes concrete sporadic arrival scenarios, counts deadline
//! misses, and can re-derive every response time from the processor-demand
//! formulation (carry-in plus windowed workload minus killed work) as an
//! independent consistency check on the operational schedule.
//!
//! Time advances event-to-event (release, completion, deadline), which is
//! observably identical to per-tick stepping on the grid but does not pay
//! for idle or uninterrupted stretches.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Exp;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::clopper_pearson;
use crate::taskset::TaskSet;
use crate::time::TimeUnit;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("execution sample {value} for task {task} job {job} exceeds wcet {wcet}")]
    SampleOutOfRange {
        task: u32,
        job: usize,
        value: u64,
        wcet: u64,
    },
    #[error("missing execution samples for task {task}: expected {expected}, got {got}")]
    MissingSample {
        task: u32,
        expected: usize,
        got: usize,
    },
    #[error("arrival sequence invalid for task {task}: {reason}")]
    BadArrivals { task: u32, reason: String },
    #[error("scenario count must be positive")]
    ZeroScenarios,
    #[error("task {0} not present in the task set")]
    UnknownTask(u32),
    #[error(
        "trace mismatch for task {task} job released at {release}: \
         demand-based response time {expected:?}, trace shows {found:?}"
    )]
    TraceMismatch {
        task: u32,
        release: u64,
        expected: Option<u64>,
        found: Option<u64>,
    },
}

/// A concrete sporadic release pattern: per task, the sorted release ticks,
/// consecutive ones at least one period apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrivalSequence {
    /// `(task id, release ticks)`, one entry per task of the set.
    pub releases: Vec<(u32, Vec<u64>)>,
    pub horizon: TimeUnit,
}

impl ArrivalSequence {
    pub fn new(
        releases: Vec<(u32, Vec<u64>)>,
        horizon: TimeUnit,
        ts: &TaskSet,
    ) -> Result<ArrivalSequence, SimError> {
        for (id, ticks) in &releases {
            let task = ts.task(*id).ok_or(SimError::UnknownTask(*id))?;
            for pair in ticks.windows(2) {
                if pair[1] < pair[0] + task.period.ticks() {
                    return Err(SimError::BadArrivals {
                        task: *id,
                        reason: format!(
                            "releases {} and {} closer than the period {}",
                            pair[0], pair[1], task.period
                        ),
                    });
                }
            }
            if let Some(&last) = ticks.last() {
                if last >= horizon.ticks() {
                    return Err(SimError::BadArrivals {
                        task: *id,
                        reason: format!("release {last} beyond horizon {horizon}"),
                    });
                }
            }
        }
        Ok(ArrivalSequence { releases, horizon })
    }

    /// Random sporadic pattern: synchronous first releases, then period plus
    /// an exponential slack with mean `period / 10`, rounded to the grid.
    pub fn sporadic(ts: &TaskSet, horizon: TimeUnit, rng: &mut impl Rng) -> ArrivalSequence {
        let releases = ts
            .tasks
            .iter()
            .map(|task| {
                let slack = Exp::new(10.0 / task.period.ticks() as f64).expect("positive rate");
                let mut ticks = Vec::new();
                let mut next = 0u64;
                while next < horizon.ticks() {
                    ticks.push(next);
                    next += task.period.ticks() + rng.sample(slack).round() as u64;
                }
                (task.id, ticks)
            })
            .collect();
        ArrivalSequence { releases, horizon }
    }

    pub fn total_jobs(&self) -> usize {
        self.releases.iter().map(|(_, r)| r.len()).sum()
    }
}

/// Everything observed about one job.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub task: u32,
    pub priority: u32,
    pub release: u64,
    pub abs_deadline: u64,
    pub exec_time: u64,
    /// Discrete time units of processor service received.
    pub service: u64,
    /// Completion tick, or `None` if the job was aborted at its deadline.
    pub completion: Option<u64>,
    /// Unprocessed work at the abort (zero for completed jobs).
    pub leftover: u64,
    /// Half-open execution intervals, in schedule order.
    pub intervals: Vec<(u64, u64)>,
}

impl JobRecord {
    pub fn missed_deadline(&self) -> bool {
        self.completion.is_none()
    }

    pub fn response_time(&self) -> Option<u64> {
        self.completion.map(|c| c - self.release)
    }

    /// Service received strictly before tick `t`.
    fn service_before(&self, t: u64) -> u64 {
        self.intervals
            .iter()
            .map(|&(s, e)| e.min(t).saturating_sub(s))
            .sum()
    }

    /// Whether the job still holds unprocessed work at tick `t` (released
    /// earlier, neither completed nor aborted by `t`).
    fn live_at(&self, t: u64) -> bool {
        if self.release >= t {
            return false;
        }
        match self.completion {
            Some(c) => c > t,
            None => self.abs_deadline > t,
        }
    }

    /// Whether the job can occupy the processor during `[t, t+1)`.
    fn pending_during(&self, t: u64) -> bool {
        self.release <= t
            && self.exec_time > 0
            && match self.completion {
                Some(c) => c > t,
                None => self.abs_deadline > t,
            }
    }
}

/// The complete schedule of one scenario, one record per released job,
/// ordered by (release, descending priority).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    pub jobs: Vec<JobRecord>,
}

impl ScheduleTrace {
    /// One JSON object per line, one line per job.
    pub fn to_jsonl(&self) -> String {
        self.jobs
            .iter()
            .map(|j| serde_json::to_string(j).expect("job record serializes"))
            .fold(String::new(), |mut acc, line| {
                acc.push_str(&line);
                acc.push('\n');
                acc
            })
    }
}

struct ActiveJob {
    idx: usize,
    priority: u32,
    deadline: u64,
    remaining: u64,
}

/// Runs the fixed-priority preemptive schedule for the given releases and
/// per-job execution times (`exec_samples` mirrors the shape of
/// `xi.releases`). A job unfinished at its absolute deadline is removed on
/// the spot; a job with zero execution time completes at its release.
pub fn simulate(
    ts: &TaskSet,
    xi: &ArrivalSequence,
    exec_samples: &[(u32, Vec<u64>)],
) -> Result<ScheduleTrace, SimError> {
    // materialize job records up front, sorted by (release, priority desc)
    let mut jobs: Vec<JobRecord> = Vec::new();
    for (id, ticks) in &xi.releases {
        let task = ts.task(*id).ok_or(SimError::UnknownTask(*id))?;
        let samples = exec_samples
            .iter()
            .find(|(sid, _)| sid == id)
            .map(|(_, s)| s.as_slice())
            .unwrap_or(&[]);
        if samples.len() != ticks.len() {
            return Err(SimError::MissingSample {
                task: *id,
                expected: ticks.len(),
                got: samples.len(),
            });
        }
        for (job, (&release, &exec)) in ticks.iter().zip(samples).enumerate() {
            if exec > task.wcet.ticks() {
                return Err(SimError::SampleOutOfRange {
                    task: *id,
                    job,
                    value: exec,
                    wcet: task.wcet.ticks(),
                });
            }
            jobs.push(JobRecord {
                task: *id,
                priority: task.priority,
                release,
                abs_deadline: release + task.deadline.ticks(),
                exec_time: exec,
                service: 0,
                completion: None,
                leftover: 0,
                intervals: Vec::new(),
            });
        }
    }
    jobs.sort_by_key(|j| (j.release, std::cmp::Reverse(j.priority)));

    let mut ready: Vec<ActiveJob> = Vec::new(); // kept sorted by descending priority
    let mut next_job = 0usize;
    let mut t = jobs.first().map_or(0, |j| j.release);

    loop {
        // 1. deadline aborts strictly precede same-tick releases
        ready.retain(|a| {
            if a.deadline <= t {
                debug_assert!(a.deadline == t, "deadline overshot");
                jobs[a.idx].leftover = a.remaining;
                false
            } else {
                true
            }
        });

        // 2. admit releases at t
        while next_job < jobs.len() && jobs[next_job].release == t {
            let job = &mut jobs[next_job];
            if job.exec_time == 0 {
                job.completion = Some(job.release);
            } else {
                let entry = ActiveJob {
                    idx: next_job,
                    priority: job.priority,
                    deadline: job.abs_deadline,
                    remaining: job.exec_time,
                };
                let pos = ready
                    .binary_search_by(|a| entry.priority.cmp(&a.priority))
                    .expect_err("priorities are unique");
                ready.insert(pos, entry);
            }
            next_job += 1;
        }

        if ready.is_empty() {
            match jobs.get(next_job) {
                Some(job) => {
                    t = job.release;
                    continue;
                }
                None => break,
            }
        }

        // 3. run the highest-priority ready job until the next event
        let mut step_end = ready[0].remaining + t;
        if let Some(job) = jobs.get(next_job) {
            step_end = step_end.min(job.release);
        }
        for a in &ready {
            step_end = step_end.min(a.deadline);
        }

        let ran = step_end - t;
        if ran > 0 {
            let a = &mut ready[0];
            a.remaining -= ran;
            let job = &mut jobs[a.idx];
            job.service += ran;
            match job.intervals.last_mut() {
                Some(last) if last.1 == t => last.1 = step_end,
                _ => job.intervals.push((t, step_end)),
            }
            if a.remaining == 0 {
                jobs[a.idx].completion = Some(step_end);
                ready.remove(0);
            }
        }
        t = step_end;
    }

    Ok(ScheduleTrace { jobs })
}

/// Structural validation of a trace: single execution at a time, the runner
/// always of maximal priority among ready jobs, and no idling while work is
/// pending.
pub fn trace_is_consistent(trace: &ScheduleTrace) -> Result<(), String> {
    let mut spans: Vec<(u64, u64, usize)> = Vec::new();
    for (idx, job) in trace.jobs.iter().enumerate() {
        if job.service > job.exec_time {
            return Err(format!("job {idx} overserved"));
        }
        for &(s, e) in &job.intervals {
            if s >= e {
                return Err(format!("job {idx} has an empty interval"));
            }
            spans.push((s, e, idx));
        }
    }
    spans.sort_unstable();
    for pair in spans.windows(2) {
        if pair[1].0 < pair[0].1 {
            return Err(format!(
                "jobs {} and {} execute concurrently",
                pair[0].2, pair[1].2
            ));
        }
    }

    // priority correctness and work conservation: the pending set and the
    // runner are constant between consecutive events, so checking the tick
    // that starts at each event covers the whole schedule
    let mut events: Vec<u64> = Vec::new();
    for job in &trace.jobs {
        events.push(job.release);
        events.push(job.abs_deadline);
        events.extend(job.intervals.iter().flat_map(|&(s, e)| [s, e]));
    }
    events.sort_unstable();
    events.dedup();
    for &t in &events {
        let best = trace
            .jobs
            .iter()
            .filter(|j| j.pending_during(t))
            .map(|j| j.priority)
            .max();
        let running = trace.jobs.iter().find_map(|j| {
            j.intervals
                .iter()
                .any(|&(s, e)| s <= t && t < e)
                .then_some(j.priority)
        });
        match (best, running) {
            (Some(best), Some(run)) if run != best => {
                return Err(format!(
                    "at tick {t}: priority {run} runs while priority {best} is ready"
                ));
            }
            (Some(_), None) => return Err(format!("processor idle at tick {t} with work ready")),
            (None, Some(run)) => {
                return Err(format!(
                    "at tick {t}: priority {run} runs with nothing pending"
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Recomputes every completed job's response time from the demand
/// formulation and compares with the trace.
///
/// For a job of priority `p` released at `a`, the demand over `[a, a+Δ)` is
/// the carry-in (live remaining work of priority ≥ p at `a`) plus the
/// execution times of priority ≥ p jobs released in the window, minus work
/// killed by aborts inside the window. The response time is the smallest
/// positive `Δ` with demand ≤ `Δ`. Jobs with zero execution time complete
/// instantly by fiat and are skipped (the infimum over positive windows
/// cannot express them).
pub fn response_time_check(
    trace: &ScheduleTrace,
    ts: &TaskSet,
    xi: &ArrivalSequence,
) -> Result<(), SimError> {
    // the trace must describe exactly the releases of xi
    let mut expected: Vec<(u32, u64)> = xi
        .releases
        .iter()
        .flat_map(|(id, ticks)| ticks.iter().map(|&t| (*id, t)))
        .collect();
    expected.sort_unstable();
    let mut traced: Vec<(u32, u64)> = trace.jobs.iter().map(|j| (j.task, j.release)).collect();
    traced.sort_unstable();
    if expected != traced {
        let (task, release) = *expected
            .iter()
            .find(|e| !traced.contains(e))
            .unwrap_or(&(u32::MAX, u64::MAX));
        return Err(SimError::TraceMismatch {
            task,
            release,
            expected: None,
            found: None,
        });
    }
    let _ = ts;

    for job in &trace.jobs {
        if job.exec_time == 0 {
            continue;
        }
        let Some(completion) = job.completion else {
            continue; // aborted jobs have no response time
        };
        let a = job.release;

        // peers: jobs of equal or higher priority
        let peers: Vec<&JobRecord> = trace
            .jobs
            .iter()
            .filter(|j| j.priority >= job.priority)
            .collect();

        let carry_in: u64 = peers
            .iter()
            .filter(|j| j.live_at(a))
            .map(|j| j.exec_time.saturating_sub(j.service_before(a)))
            .sum();

        // demand jumps strictly after a release (work added) or an abort
        // (work removed) of a peer job, so each jump at offset `d` opens a
        // new constant segment starting at window length `d + 1`
        let mut starts: Vec<u64> = vec![1];
        for j in &peers {
            if j.release > a {
                starts.push(j.release - a + 1);
            }
            if j.completion.is_none() && j.abs_deadline > a {
                starts.push(j.abs_deadline - a + 1);
            }
        }
        starts.sort_unstable();
        starts.dedup();

        let demand_at = |delta: u64| -> u64 {
            let window_end = a + delta;
            let released: u64 = peers
                .iter()
                .filter(|j| j.release >= a && j.release < window_end)
                .map(|j| j.exec_time)
                .sum();
            let killed: u64 = peers
                .iter()
                .filter(|j| {
                    j.completion.is_none()
                        && j.abs_deadline < window_end
                        && (j.live_at(a) || j.release >= a)
                })
                .map(|j| j.leftover)
                .sum();
            (carry_in + released).saturating_sub(killed)
        };

        // within a segment demand is constant, so the first feasible Δ is
        // either the demand itself (if it lands inside) or not in the segment
        let mut response = None;
        'search: for (i, &lo) in starts.iter().enumerate() {
            let hi = starts.get(i + 1).copied().unwrap_or(u64::MAX);
            let candidate = demand_at(lo).max(lo);
            if candidate < hi {
                response = Some(candidate);
                break 'search;
            }
        }

        if response != Some(completion - a) {
            return Err(SimError::TraceMismatch {
                task: job.task,
                release: a,
                expected: response,
                found: job.response_time(),
            });
        }
    }
    Ok(())
}

/// Fraction of the target task's jobs that miss their deadline over many
/// random sporadic scenarios, with a 95% Clopper-Pearson half-width.
pub fn empirical_dfp(
    ts: &TaskSet,
    target: u32,
    scenarios: u64,
    seed: u64,
) -> Result<(f64, f64), SimError> {
    if scenarios == 0 {
        return Err(SimError::ZeroScenarios);
    }
    let target_task = ts.task(target).ok_or(SimError::UnknownTask(target))?;
    let horizon = TimeUnit(target_task.period.ticks() * 4 + 1);

    let alias: Vec<(u32, WeightedAliasIndex<f64>)> = ts
        .tasks
        .iter()
        .map(|task| {
            let table = WeightedAliasIndex::new(task.exec_pmf.probs().to_vec())
                .expect("validated pmf weights");
            (task.id, table)
        })
        .collect();

    let mut misses = 0u64;
    let mut total = 0u64;
    for scenario in 0..scenarios {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(scenario);
        let xi = ArrivalSequence::sporadic(ts, horizon, &mut rng);
        let samples: Vec<(u32, Vec<u64>)> = xi
            .releases
            .iter()
            .zip(&alias)
            .map(|((id, ticks), (_, table))| {
                let draws = ticks
                    .iter()
                    .map(|_| table.sample(&mut rng) as u64)
                    .collect();
                (*id, draws)
            })
            .collect();
        let trace = simulate(ts, &xi, &samples)?;
        for job in trace.jobs.iter().filter(|j| j.task == target) {
            total += 1;
            misses += job.missed_deadline() as u64;
        }
    }

    let rate = misses as f64 / total as f64;
    let (lo, hi) = clopper_pearson(misses, total, 0.95);
    Ok((rate, (hi - lo) / 2.0))
}
