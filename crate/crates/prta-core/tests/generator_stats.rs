//! Statistical checks of the task-set generator against independent oracles:
//! a Kolmogorov-Smirnov test for log-uniform periods, Monte Carlo marginals
//! for the utilization split, and fine-grid quadrature for the execution
//! mixture's mean.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use prta_core::taskset::{
    build_execution_pmf, generate_periods, generate_taskset, generate_utilizations,
    normalized_mixture_mean, save_taskset, MixtureParams,
};
use prta_core::{GeneratorConfig, TimeUnit};

/// Density of the (untruncated) normalized execution mixture at z.
fn mixture_density(m: &MixtureParams, z: f64) -> f64 {
    let phi = |z: f64, mu: f64, sigma: f64| {
        let d = (z - mu) / sigma;
        (-0.5 * d * d).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    m.w_normal * phi(z, 1.0 / m.mu_div, 1.0 / m.sigma_div)
        + m.w_abnormal * phi(z, 1.0 / m.mu_ab_div, 1.0 / m.sigma_ab_div)
}

/// Simpson's rule on [a, b] with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n.is_multiple_of(2));
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Quadrature oracle for the mean of the truncation-by-clipping mixture on
/// [0, 1]: interior contribution plus the upper tail folded onto 1 (the
/// lower tail folds onto 0 and contributes nothing).
fn kappa_by_quadrature(m: &MixtureParams) -> f64 {
    let interior = simpson(|z| z * mixture_density(m, z), 0.0, 1.0, 200_000);
    let upper_tail = simpson(|z| mixture_density(m, z), 1.0, 3.0, 200_000);
    interior + upper_tail
}

#[test]
fn log_uniform_periods_pass_ks_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (min, max) = (0.010, 1.0);
    let n = 10_000;
    let periods = generate_periods(n, (min, max), 1e-6, &mut rng).unwrap();

    // map ln(period) onto [0,1] and compare against the uniform CDF
    let mut unit: Vec<f64> = periods
        .iter()
        .map(|p| (p.as_seconds(1e-6).ln() - min.ln()) / (max.ln() - min.ln()))
        .collect();
    unit.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ks: f64 = 0.0;
    for (i, &u) in unit.iter().enumerate() {
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        ks = ks.max((u - lo).abs()).max((hi - u).abs());
    }
    assert!(ks <= 0.02, "KS statistic {ks}");
}

#[test]
fn utilization_split_is_symmetric() {
    let n = 10;
    let total = 0.7;
    let draws = 1000;
    let mut sums = vec![0.0; n];
    for seed in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let utils = generate_utilizations(n, total, &mut rng).unwrap();
        for (s, u) in sums.iter_mut().zip(&utils) {
            *s += u;
        }
    }
    for (i, s) in sums.iter().enumerate() {
        let mean = s / draws as f64;
        assert!(
            (mean - total / n as f64).abs() <= 0.005,
            "task {i} marginal mean {mean}"
        );
    }
}

#[test]
fn mixture_mean_matches_quadrature_oracle() {
    let mixture = MixtureParams::default();
    let oracle = kappa_by_quadrature(&mixture);
    let closed_form = normalized_mixture_mean(&mixture);
    assert!(
        (closed_form - oracle).abs() <= 1e-9,
        "closed form {closed_form} vs quadrature {oracle}"
    );

    // discretized distribution reproduces the continuous mean to half a tick
    let wcet = 10_000u64;
    let pmf = build_execution_pmf(TimeUnit(wcet), &mixture);
    let mean_ticks = pmf.moments(1.0).unwrap().mean;
    assert!(
        (mean_ticks - oracle * wcet as f64).abs() <= 0.5,
        "pmf mean {mean_ticks} vs oracle {}",
        oracle * wcet as f64
    );
    assert!((mean_ticks / wcet as f64 - oracle).abs() <= 0.001);
}

#[test]
fn execution_distribution_scales_with_wcet() {
    let mixture = MixtureParams::default();
    let ratios: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&w| {
            let pmf = build_execution_pmf(TimeUnit(w), &mixture);
            pmf.moments(1.0).unwrap().mean / w as f64
        })
        .collect();
    for pair in ratios.windows(2) {
        assert!(
            (pair[0] - pair[1]).abs() / pair[0] <= 0.005,
            "scale family broken: {ratios:?}"
        );
    }
}

#[test]
fn generation_is_fully_deterministic() {
    let cfg = GeneratorConfig {
        n_tasks: 12,
        total_utilization: 0.6,
        seed: 1234,
        ..GeneratorConfig::default()
    };
    let a = generate_taskset(&cfg).unwrap();
    let b = generate_taskset(&cfg).unwrap();
    assert_eq!(a, b);

    let dir = tempfile::tempdir().unwrap();
    let (pa, pb) = (dir.path().join("a.json"), dir.path().join("b.json"));
    save_taskset(&a, &pa).unwrap();
    save_taskset(&b, &pb).unwrap();
    assert_eq!(
        std::fs::read(&pa).unwrap(),
        std::fs::read(&pb).unwrap(),
        "serialized bytes differ"
    );
}
