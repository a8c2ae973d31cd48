//! Monte Carlo estimation of the aggregate-demand tail.
//!
//! Samples the demand `S` directly: one execution time per job of the
//! release pattern, drawn independently from the task's distribution via
//! alias tables. The sample space is split into fixed-size blocks, each with
//! its own counter-mode RNG stream derived from (seed, block index), so the
//! result is identical for any worker count.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use super::{AnalysisError, AnalysisResult, Diagnostics, Method, ReleaseModel};
use crate::taskset::TaskSet;

const BLOCK: u64 = 4096;

/// Exact (Clopper-Pearson) binomial confidence interval.
pub fn clopper_pearson(successes: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials);
    let alpha = 1.0 - confidence;
    let (x, n) = (successes as f64, trials as f64);
    let lo = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0)
            .expect("valid shape")
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x)
            .expect("valid shape")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

pub fn wcdfp_mc(
    ts: &TaskSet,
    target: u32,
    samples: u64,
    seed: u64,
) -> Result<AnalysisResult, AnalysisError> {
    if samples == 0 {
        return Err(AnalysisError::ZeroSamples);
    }
    let started = Instant::now();
    let model = ReleaseModel::at_deadline(ts, target)?;
    let deadline = model.horizon.ticks();

    // one alias table per distinct task, reused across its jobs
    let mut tables: Vec<(WeightedAliasIndex<f64>, u64)> = Vec::new();
    for &(task, count) in &model.interferers {
        let table = WeightedAliasIndex::new(task.exec_pmf.probs().to_vec())
            .expect("valid execution distribution");
        tables.push((table, count));
    }
    tables.push((
        WeightedAliasIndex::new(model.target.exec_pmf.probs().to_vec())
            .expect("valid execution distribution"),
        1,
    ));

    let blocks = samples.div_ceil(BLOCK);
    let failures: u64 = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let todo = BLOCK.min(samples - block * BLOCK);
            let mut failed = 0u64;
            for _ in 0..todo {
                let mut demand = 0u64;
                for (table, count) in &tables {
                    for _ in 0..*count {
                        demand += table.sample(&mut rng) as u64;
                    }
                }
                if demand >= deadline {
                    failed += 1;
                }
            }
            failed
        })
        .sum();

    let wcdfp = failures as f64 / samples as f64;
    let (lo, hi) = clopper_pearson(failures, samples, 0.95);
    Ok(AnalysisResult {
        wcdfp,
        method: Method::Mc,
        wall_time: started.elapsed().as_secs_f64(),
        diagnostics: Diagnostics {
            mc_halfwidth: Some((hi - lo) / 2.0),
            ..Diagnostics::none()
        },
    })
}
