use holderlab_core::holder::{check_holder_grid, holder_extend, min_n0, splice, PiecewiseLinear, SpliceSettings};
use holderlab_core::selfaffine::SelfAffineParams;
use proptest::prelude::*;

fn f0() -> PiecewiseLinear {
    PiecewiseLinear::new(vec![0.0, 0.3, 0.6, 1.0], vec![0.0, 0.12, 0.02, 0.15]).unwrap()
}

fn settings() -> SpliceSettings {
    SpliceSettings { alpha: 0.25, c0: 0.5, r0: 0.1, params: SelfAffineParams::new(2, 3).unwrap() }
}

/// Brute-force check of the Hölder inequality over every pair of samples.
fn pairwise(values: &[f64], step: f64, alpha: f64, c: f64) -> bool {
    (0..values.len()).all(|i| {
        (i + 1..values.len()).all(|j| (values[j] - values[i]).abs() <= c * ((j - i) as f64 * step).powf(alpha) + 1e-12)
    })
}

#[test]
fn splice_at_minimal_n0() {
    let s = settings();
    let n0 = min_n0(&f0(), &s).unwrap();
    let (f, g) = splice(f0(), s, n0).unwrap();
    assert_eq!(g.base, 6);
    assert!(check_holder_grid(&g, s.alpha, 1.0).is_ok());
    let bound = f.distance_bound();
    assert!(bound <= s.r0 / 2.0);
    let h = g.step();
    for (t, &v) in g.values.iter().enumerate() {
        assert!((v - f0().eval(t as f64 * h)).abs() <= bound, "t={t}");
    }
    for i in 0..3 {
        for j in 0..=n0 {
            let x = f.node(i, j);
            assert!((f.eval(x) - f0().eval(x)).abs() <= 1e-12);
        }
    }
}

#[test]
fn splice_rejects_bad_inputs() {
    let s = settings();
    let n0 = min_n0(&f0(), &s).unwrap();
    assert!(splice(f0(), s, n0 - 1).is_err());
    let flat = PiecewiseLinear::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 0.1]).unwrap();
    assert!(min_n0(&flat, &s).is_err());
    assert!(min_n0(&f0(), &SpliceSettings { c0: 1.0, ..s }).is_err());
    assert!(min_n0(&f0(), &SpliceSettings { alpha: 0.4, ..s }).is_err());
}

#[test]
fn grid_check_agrees_with_brute_force_on_splice() {
    let s = SpliceSettings { alpha: 0.3, c0: 0.6, r0: 0.5, params: SelfAffineParams::new(2, 3).unwrap() };
    let f0 = PiecewiseLinear::new(vec![0.0, 0.5, 1.0], vec![0.0, 0.05, 0.01]).unwrap();
    let n0 = min_n0(&f0, &s).unwrap();
    let (f, _) = splice(f0, s, n0).unwrap();
    let g = holderlab_core::GridFunction::sample(2, 10, |x| f.eval(x)).unwrap();
    for c in [0.2, 0.5, 1.0] {
        assert_eq!(check_holder_grid(&g, 0.3, c).is_ok(), pairwise(&g.values, g.step(), 0.3, c), "c={c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extension_is_holder_everywhere(
        xs in prop::collection::btree_set(0u32..1000, 1..8),
        seed in prop::collection::vec(-1.0f64..1.0, 8),
        alpha in 0.2f64..1.0,
    ) {
        // Values are scaled down until the data itself is 1-Hölder.
        let xs: Vec<f64> = xs.into_iter().map(|x| x as f64 / 999.0).collect();
        let mut pts: Vec<(f64, f64)> = xs.iter().zip(&seed).map(|(&x, &y)| (x, y)).collect();
        let ok = |p: &[(f64, f64)]| p.iter().enumerate().all(|(i, a)| {
            p[i + 1..].iter().all(|b| (a.1 - b.1).abs() <= (a.0 - b.0).abs().powf(alpha))
        });
        while !ok(&pts) {
            pts.iter_mut().for_each(|p| p.1 *= 0.5);
        }
        let f = holder_extend(&pts, alpha, 1.0).unwrap();
        for &(x, y) in &pts {
            prop_assert!((f.eval(x) - y).abs() < 1e-12);
        }
        let g = f.sample(2, 9).unwrap();
        prop_assert!(pairwise(&g.values, g.step(), alpha, 1.0 + 1e-9));
    }
}
