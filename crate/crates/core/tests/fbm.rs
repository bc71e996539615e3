use holderlab_core::fbm::{
    covariance, fgn_autocovariance, modulus_ratio, modulus_ratio_up_to, sample_path, sample_path_with, FgnSampler,
    Method,
};
use holderlab_core::stats::mean_stderr;
use proptest::prelude::*;

/// Mean and standard error of `f(path)` over `count` paths.
fn monte_carlo(sampler: &FgnSampler, seed: u64, count: u64, f: impl Fn(&[f64]) -> f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..count).map(|i| f(&sample_path_with(sampler, seed, i).values)).collect();
    mean_stderr(&xs)
}

#[test]
fn unit_variance_at_one() {
    for alpha in [0.3, 0.7] {
        let s = FgnSampler::new(8, alpha).unwrap();
        let (mean, se) = monte_carlo(&s, 21, 10_000, |v| v[256] * v[256]);
        assert!((mean - 1.0).abs() <= 3.0 * se, "alpha {alpha}: {mean} ± {se}");
    }
}

#[test]
fn brownian_increments_uncorrelated() {
    let s = FgnSampler::new(6, 0.5).unwrap();
    let (mean, se) = monte_carlo(&s, 22, 10_000, |v| (v[11] - v[10]) * (v[12] - v[11]) * 64.0);
    assert!(mean.abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn covariance_at_quarter_points() {
    for alpha in [0.2, 0.5, 0.8] {
        let s = FgnSampler::new(8, alpha).unwrap();
        let (mean, se) = monte_carlo(&s, 23, 10_000, |v| v[64] * v[192]);
        let exact = covariance(0.25, 0.75, alpha).unwrap();
        assert!((mean - exact).abs() <= 3.0 * se, "alpha {alpha}: {mean} vs {exact} ± {se}");
    }
}

#[test]
fn increments_are_stationary() {
    let alpha = 0.7;
    let n = 6;
    let s = FgnSampler::new(n, alpha).unwrap();
    let exact = fgn_autocovariance(3, alpha, n);
    for start in [0usize, 30, 57] {
        let (mean, se) = monte_carlo(&s, 24, 10_000, |v| (v[start + 1] - v[start]) * (v[start + 4] - v[start + 3]));
        assert!((mean - exact).abs() <= 3.5 * se, "start {start}: {mean} vs {exact} ± {se}");
    }
}

#[test]
fn levinson_fallback_has_the_same_covariance() {
    let s = FgnSampler::with_method(6, 0.35, Method::Toeplitz).unwrap();
    assert!(!s.uses_circulant());
    let (mean, se) = monte_carlo(&s, 25, 10_000, |v| v[16] * v[48]);
    let exact = covariance(0.25, 0.75, 0.35).unwrap();
    assert!((mean - exact).abs() <= 3.0 * se, "{mean} vs {exact} ± {se}");
    let (var, se) = monte_carlo(&s, 26, 10_000, |v| v[64] * v[64]);
    assert!((var - 1.0).abs() <= 3.0 * se);
}

#[test]
fn fallback_is_capped() {
    assert!(FgnSampler::with_method(13, 0.4, Method::Toeplitz).is_err());
    assert!(FgnSampler::with_method(12, 0.4, Method::Circulant).unwrap().uses_circulant());
}

#[test]
fn small_lag_modulus() {
    // The modulus bound is a statement about h -> 0; with h <= 2^{-10} it holds
    // for nearly every path at n = 14.
    let s = FgnSampler::new(14, 0.5).unwrap();
    let ok = (0..100)
        .filter(|&i| modulus_ratio_up_to(&sample_path_with(&s, 27, i), 10).unwrap() <= 1.5)
        .count();
    assert!(ok >= 99, "{ok}");
}

#[test]
fn full_range_modulus_dominates_small_lags() {
    let p = sample_path(10, 0.5, 28).unwrap();
    let full = modulus_ratio(&p).unwrap();
    let small = modulus_ratio_up_to(&p, 5).unwrap();
    assert!(full >= small && small > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn paths_are_deterministic_and_start_at_zero(n in 0u32..10, alpha in 0.05f64..0.95, seed in any::<u64>()) {
        let a = sample_path(n, alpha, seed).unwrap();
        let b = sample_path(n, alpha, seed).unwrap();
        prop_assert_eq!(a.values.len(), (1usize << n) + 1);
        prop_assert_eq!(a.values[0], 0.0);
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn covariance_is_symmetric_and_diagonal(s in 0.0f64..1.0, t in 0.0f64..1.0, alpha in 0.01f64..0.99) {
        let c = covariance(s, t, alpha).unwrap();
        prop_assert!((c - covariance(t, s, alpha).unwrap()).abs() < 1e-15);
        prop_assert!((covariance(t, t, alpha).unwrap() - t.powf(2.0 * alpha)).abs() < 1e-15);
    }
}
