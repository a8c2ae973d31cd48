//! Property tests for the distribution arithmetic: mass conservation,
//! transform/direct equivalence, algebraic laws of convolution, truncation
//! exactness, and the stochastic partial order.

use proptest::prelude::*;

use prta_core::pmf::Pmf;
use prta_core::time::TimeUnit;

/// Random sub-distribution with support length in [1, max_len] and total
/// mass in (0, 1].
fn arb_pmf(max_len: usize) -> impl Strategy<Value = Pmf> {
    (1..=max_len, any::<u64>()).prop_map(move |(len, seed)| {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        let scale = rng.random::<f64>().max(1e-3) / sum;
        let pairs: Vec<(u64, f64)> = raw
            .iter()
            .enumerate()
            .map(|(i, &x)| (i as u64, x * scale))
            .collect();
        Pmf::from_pairs(&pairs).unwrap()
    })
}

/// Normalized variant for operations that require full mass.
fn arb_normalized_pmf(max_len: usize) -> impl Strategy<Value = Pmf> {
    (1..=max_len, any::<u64>()).prop_map(move |(len, seed)| {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        let pairs: Vec<(u64, f64)> = raw
            .iter()
            .enumerate()
            .map(|(i, &x)| (i as u64, x / sum))
            .collect();
        Pmf::from_pairs(&pairs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn convolution_conserves_mass((a, b) in (arb_pmf(256), arb_pmf(256))) {
        let direct = a.convolve_direct(&b);
        let (fft, _) = a.convolve_fft(&b).unwrap();
        let want = a.total_mass() * b.total_mass();
        prop_assert!((direct.total_mass() - want).abs() <= 1e-9);
        prop_assert!((fft.total_mass() - want).abs() <= 1e-9);
    }

    #[test]
    fn fft_equals_direct((a, b) in (arb_pmf(512), arb_pmf(512))) {
        let (fft, clamped) = a.convolve_fft(&b).unwrap();
        prop_assert!(fft.max_abs_diff(&a.convolve_direct(&b)) <= 1e-12);
        prop_assert!(clamped <= 1e-12);
    }

    #[test]
    fn convolution_commutes_and_associates(
        (a, b, c) in (arb_pmf(64), arb_pmf(64), arb_pmf(64))
    ) {
        let ab = a.convolve_direct(&b);
        let ba = b.convolve_direct(&a);
        prop_assert!(ab.max_abs_diff(&ba) <= 1e-12);

        let ab_c = ab.convolve_direct(&c);
        let a_bc = a.convolve_direct(&b.convolve_direct(&c));
        prop_assert!(ab_c.max_abs_diff(&a_bc) <= 1e-12);
    }

    #[test]
    fn truncation_is_exact(
        p in arb_normalized_pmf(48),
        k in 1u64..6,
        bound in 1u64..160,
    ) {
        let bound = TimeUnit(bound);
        let (full, _) = p.self_conv_power(k, None).unwrap();
        let (_, tail) = full.truncate_and_sum(bound);
        let (cut, removed) = p.self_conv_power(k, Some(bound)).unwrap();
        prop_assert!((1.0 - cut.total_mass() - tail).abs() <= 1e-9);
        prop_assert!((removed - tail).abs() <= 1e-9);
    }

    #[test]
    fn truncation_partitions_mass(p in arb_pmf(256), bound in 0u64..300) {
        let (kept, removed) = p.truncate_and_sum(TimeUnit(bound));
        prop_assert!((kept.total_mass() + removed - p.total_mass()).abs() <= 1e-12);
    }

    #[test]
    fn dominance_is_a_partial_order(
        (x, y, z) in (
            arb_normalized_pmf(32),
            arb_normalized_pmf(32),
            arb_normalized_pmf(32),
        )
    ) {
        // reflexive
        prop_assert!(x.stochastically_dominated_by(&x).unwrap());

        // antisymmetric up to numerical equality
        if x.stochastically_dominated_by(&y).unwrap()
            && y.stochastically_dominated_by(&x).unwrap()
        {
            prop_assert!(x.max_abs_diff(&y) <= 1e-9);
        }

        // transitive
        if x.stochastically_dominated_by(&y).unwrap()
            && y.stochastically_dominated_by(&z).unwrap()
        {
            prop_assert!(x.stochastically_dominated_by(&z).unwrap());
        }
    }
}
