//! Synthetic task-set generation: log-uniform periods, a Dirichlet-style
//! utilization split, and truncated two-component normal-mixture execution
//! distributions discretized to the grid.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{GeneratorConfig, Task, TaskSet, TaskSetError};
use crate::pmf::Pmf;
use crate::time::TimeUnit;

/// RNG stream indices, one per draw purpose, so that changing how one
/// quantity is sampled never perturbs the others under a fixed seed.
const STREAM_PERIODS: u64 = 0;
const STREAM_UTILIZATIONS: u64 = 1;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// How the deterministic worst case is derived from the assigned utilization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WcetMode {
    /// `wcet = round(u * period)`: utilization is the worst-case load.
    WcetUtilization,
    /// `wcet = round(u * period / kappa)` with `kappa` the mean of the
    /// normalized execution distribution, so the *mean* load matches `u`.
    MeanUtilization,
}

/// Two-component normal mixture, parameterized relative to the wcet:
/// `w_normal * N(wcet/mu_div, wcet/sigma_div) + w_abnormal * N(wcet/mu_ab_div,
/// wcet/sigma_ab_div)`, truncated to `[0, wcet]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureParams {
    pub w_normal: f64,
    pub w_abnormal: f64,
    pub mu_div: f64,
    pub sigma_div: f64,
    pub mu_ab_div: f64,
    pub sigma_ab_div: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams {
            w_normal: 0.95,
            w_abnormal: 0.05,
            mu_div: 3.0,
            sigma_div: 6.0,
            mu_ab_div: 1.2,
            sigma_ab_div: 30.0,
        }
    }
}

impl MixtureParams {
    /// `(weight, mu, sigma)` per component, scaled to the given wcet.
    fn components(&self, wcet: f64) -> [(f64, f64, f64); 2] {
        [
            (self.w_normal, wcet / self.mu_div, wcet / self.sigma_div),
            (
                self.w_abnormal,
                wcet / self.mu_ab_div,
                wcet / self.sigma_ab_div,
            ),
        ]
    }
}

/// `n` periods sampled log-uniformly from `range` seconds and rounded to the
/// grid.
pub fn generate_periods(
    n: usize,
    range: (f64, f64),
    gamma: f64,
    rng: &mut impl Rng,
) -> Result<Vec<TimeUnit>, TaskSetError> {
    let (min, max) = range;
    if !(min > 0.0 && max > min) {
        return Err(TaskSetError::EmptyRange { min, max });
    }
    let (lo, hi) = (min.ln(), max.ln());
    let (min_ticks, max_ticks) = (
        TimeUnit::from_seconds_rounded(min, gamma).ticks().max(1),
        TimeUnit::from_seconds_rounded(max, gamma).ticks(),
    );
    Ok((0..n)
        .map(|_| {
            let seconds = (lo + rng.random::<f64>() * (hi - lo)).exp();
            let ticks = TimeUnit::from_seconds_rounded(seconds, gamma).ticks();
            TimeUnit(ticks.clamp(min_ticks, max_ticks))
        })
        .collect())
}

/// Splits `total` across `n` tasks with a flat Dirichlet draw (normalized
/// unit exponentials), resampling in the rare case a share exceeds 1.
pub fn generate_utilizations(
    n: usize,
    total: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, TaskSetError> {
    if n == 0 || !(total > 0.0 && total < n as f64) {
        return Err(TaskSetError::InfeasibleTotal { total, n });
    }
    loop {
        let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let sum: f64 = draws.iter().sum();
        let utils: Vec<f64> = draws.iter().map(|&d| d / sum * total).collect();
        if utils.iter().all(|&u| u > 0.0 && u <= 1.0) {
            return Ok(utils);
        }
    }
}

/// Deterministic worst case, in ticks, for a task of the given utilization.
pub fn derive_wcet(
    u: f64,
    period: TimeUnit,
    mode: WcetMode,
    kappa: f64,
) -> Result<TimeUnit, TaskSetError> {
    let target = match mode {
        WcetMode::WcetUtilization => u * period.ticks() as f64,
        WcetMode::MeanUtilization => u * period.ticks() as f64 / kappa,
    };
    let ticks = target.round() as u64;
    if ticks == 0 {
        return Err(TaskSetError::WcetBelowResolution {
            utilization: u,
            period,
        });
    }
    Ok(TimeUnit(ticks))
}

/// Mean of the execution distribution normalized to wcet 1: the expectation
/// of the mixture with values clipped into `[0, 1]`, mirroring how the
/// discretization folds out-of-range mass into the boundary bins.
pub fn normalized_mixture_mean(mixture: &MixtureParams) -> f64 {
    mixture
        .components(1.0)
        .iter()
        .map(|&(w, mu, sigma)| {
            let std = Normal::standard();
            let (alpha, beta) = (-mu / sigma, (1.0 - mu) / sigma);
            let interior = mu * (std.cdf(beta) - std.cdf(alpha))
                - sigma * (density_std(beta) - density_std(alpha));
            w * (interior + (1.0 - std.cdf(beta)))
        })
        .sum()
}

fn density_std(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Discretizes the truncated mixture onto ticks `0..=wcet`: interior bin `k`
/// receives the mass of `[k-1/2, k+1/2)`, the boundary bins absorb everything
/// clipped outside `[0, wcet]`, and the result is renormalized to mass 1.
pub fn build_execution_pmf(wcet: TimeUnit, mixture: &MixtureParams) -> Pmf {
    let w = wcet.ticks();
    assert!(w >= 1, "wcet below resolution");
    let mut probs = vec![0.0; w as usize + 1];
    for (weight, mu, sigma) in mixture.components(w as f64) {
        let comp = Normal::new(mu, sigma).expect("positive sigma");
        for (k, slot) in probs.iter_mut().enumerate() {
            let lo = if k == 0 {
                f64::NEG_INFINITY
            } else {
                k as f64 - 0.5
            };
            let hi = if k == w as usize {
                f64::INFINITY
            } else {
                k as f64 + 0.5
            };
            *slot += weight * (comp.cdf(hi) - comp.cdf(lo));
        }
    }
    let mass: f64 = probs.iter().sum();
    for p in &mut probs {
        *p = (*p / mass).max(0.0);
    }
    Pmf::from_pairs(
        &probs
            .iter()
            .enumerate()
            .map(|(k, &p)| (k as u64, p))
            .collect::<Vec<_>>(),
    )
    .expect("bin masses are valid probabilities")
}

/// Rate-monotonic priorities: strictly shorter period wins, ties go to the
/// lower id. Tasks with an unset (zero) deadline get `deadline = period`.
pub fn assign_rm_priorities(tasks: &mut [Task]) {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by_key(|&i| (tasks[i].period, tasks[i].id));
    let n = tasks.len() as u32;
    for (rank, &i) in order.iter().enumerate() {
        tasks[i].priority = n - rank as u32;
    }
    for task in tasks.iter_mut() {
        if task.deadline.ticks() == 0 {
            task.deadline = task.period;
        }
    }
}

/// Generates a full task set from the configuration. Deterministic: the same
/// config yields a byte-identical serialized set.
pub fn generate_taskset(cfg: &GeneratorConfig) -> Result<TaskSet, TaskSetError> {
    let periods = generate_periods(
        cfg.n_tasks,
        cfg.period_range,
        cfg.gamma,
        &mut stream(cfg.seed, STREAM_PERIODS),
    )?;
    let utils = generate_utilizations(
        cfg.n_tasks,
        cfg.total_utilization,
        &mut stream(cfg.seed, STREAM_UTILIZATIONS),
    )?;
    let kappa = normalized_mixture_mean(&cfg.mixture);
    let mut tasks = Vec::with_capacity(cfg.n_tasks);
    for (id, (period, u)) in periods.into_iter().zip(utils).enumerate() {
        let wcet = derive_wcet(u, period, cfg.wcet_mode, kappa)?;
        tasks.push(Task {
            id: id as u32,
            period,
            deadline: TimeUnit(0),
            priority: 0,
            wcet,
            exec_pmf: build_execution_pmf(wcet, &cfg.mixture),
        });
    }
    assign_rm_priorities(&mut tasks);
    TaskSet::new(tasks, cfg.gamma, cfg.seed, Some(cfg.hash_hex()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periods_stay_in_range_and_replay() {
        let range = (0.010, 1.0);
        let a = generate_periods(10, range, 1e-6, &mut stream(42, 0)).unwrap();
        let b = generate_periods(10, range, 1e-6, &mut stream(42, 0)).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!((10_000..=1_000_000).contains(&p.ticks()), "period {p}");
        }
        assert!(matches!(
            generate_periods(3, (0.5, 0.5), 1e-6, &mut stream(0, 0)),
            Err(TaskSetError::EmptyRange { .. })
        ));
    }

    #[test]
    fn utilizations_sum_to_total() {
        let utils = generate_utilizations(20, 0.65, &mut stream(7, 1)).unwrap();
        let sum: f64 = utils.iter().sum();
        assert!((sum - 0.65).abs() <= 1e-9);
        assert!(utils.iter().all(|&u| u > 0.0 && u <= 1.0));

        let single = generate_utilizations(1, 0.6, &mut stream(7, 1)).unwrap();
        assert!((single[0] - 0.6).abs() <= 1e-12);

        assert!(matches!(
            generate_utilizations(2, 2.5, &mut stream(0, 1)),
            Err(TaskSetError::InfeasibleTotal { .. })
        ));
    }

    #[test]
    fn wcet_derivation_modes() {
        let period = TimeUnit(10_000);
        let wcet = derive_wcet(0.1, period, WcetMode::WcetUtilization, f64::NAN).unwrap();
        assert_eq!(wcet, TimeUnit(1000));

        let kappa = normalized_mixture_mean(&MixtureParams::default());
        let mean_mode = derive_wcet(0.1, period, WcetMode::MeanUtilization, kappa).unwrap();
        assert_eq!(mean_mode.ticks(), (1000.0 / kappa).round() as u64);

        assert!(matches!(
            derive_wcet(1e-9, TimeUnit(100), WcetMode::WcetUtilization, f64::NAN),
            Err(TaskSetError::WcetBelowResolution { .. })
        ));
    }

    #[test]
    fn execution_pmf_is_normalized_and_bounded() {
        let mixture = MixtureParams::default();
        for wcet in [1u64, 7, 1000, 10_000] {
            let pmf = build_execution_pmf(TimeUnit(wcet), &mixture);
            assert!((pmf.total_mass() - 1.0).abs() <= 1e-12, "wcet {wcet}");
            assert!(pmf.max_support().unwrap() <= TimeUnit(wcet));
        }
        let tiny = build_execution_pmf(TimeUnit(1), &mixture);
        assert_eq!(tiny.len(), 2);
    }

    #[test]
    fn rate_monotonic_order_and_ties() {
        let mk = |id, period_ms: u64| Task {
            id,
            period: TimeUnit(period_ms * 1000),
            deadline: TimeUnit(0),
            priority: 0,
            wcet: TimeUnit(1),
            exec_pmf: Pmf::delta(TimeUnit(1)),
        };
        let mut tasks = vec![mk(0, 30), mk(1, 10), mk(2, 20)];
        assign_rm_priorities(&mut tasks);
        assert!(tasks[1].priority > tasks[2].priority);
        assert!(tasks[2].priority > tasks[0].priority);
        assert!(tasks.iter().all(|t| t.deadline == t.period));

        let mut tied = vec![mk(0, 10), mk(1, 10)];
        assign_rm_priorities(&mut tied);
        assert!(tied[0].priority > tied[1].priority);
    }

    #[test]
    fn generated_set_hits_target_utilization() {
        let cfg = GeneratorConfig {
            n_tasks: 25,
            total_utilization: 0.65,
            seed: 11,
            ..GeneratorConfig::default()
        };
        let ts = generate_taskset(&cfg).unwrap();
        assert_eq!(ts.tasks.len(), 25);
        let u = ts.total_utilization();
        assert!((u - 0.65).abs() / 0.65 <= 0.01, "utilization {u}");
        ts.validate().unwrap();
        assert_eq!(ts.config_hash, Some(cfg.hash_hex()));

        // every execution distribution is dominated by its deterministic wcet
        for task in &ts.tasks {
            assert!(task
                .exec_pmf
                .stochastically_dominated_by(&Pmf::delta(task.wcet))
                .unwrap());
        }
    }
}
