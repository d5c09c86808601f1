//! Properties of the finite-blocklength formulas.

use otfs_outage_core::{
    achievable_rate, awgn_capacity, awgn_dispersion, parallel_capacity, parallel_dispersion, parallel_outage,
    q_function, scalar_outage, SnrVector,
};
use proptest::prelude::*;

fn snrs(v: &[f64]) -> SnrVector {
    SnrVector::new(v.to_vec()).unwrap()
}

#[test]
fn roundtrip_grid() {
    for gamma in [0.5, 3.0, 10.0] {
        for n in [128, 512, 2048] {
            for eps in [1e-1, 1e-3, 1e-6] {
                let rate = achievable_rate(gamma, n, eps).unwrap();
                let back = scalar_outage(gamma, n, rate).unwrap();
                assert!((back - eps).abs() <= 1e-9, "gamma={gamma} n={n} eps={eps} back={back}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn q_is_monotone_and_symmetric(x in -8.0f64..8.0, dx in 0.0f64..3.0) {
        prop_assert!(q_function(x + dx).unwrap() <= q_function(x).unwrap());
        prop_assert!((q_function(x).unwrap() + q_function(-x).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn capacity_strictly_increasing(v in prop::collection::vec(0.0f64..100.0, 1..8), i in 0usize..8, bump in 1e-3f64..10.0) {
        let i = i % v.len();
        let mut w = v.clone();
        w[i] += bump;
        prop_assert!(parallel_capacity(&snrs(&w)) > parallel_capacity(&snrs(&v)));
        prop_assert!(awgn_capacity(v[i] + bump).unwrap() > awgn_capacity(v[i]).unwrap());
    }

    #[test]
    fn additivity(a in prop::collection::vec(0.0f64..100.0, 1..6), b in prop::collection::vec(0.0f64..100.0, 1..6)) {
        let ab: Vec<f64> = a.iter().chain(&b).copied().collect();
        let (sa, sb, sab) = (snrs(&a), snrs(&b), snrs(&ab));
        prop_assert!((parallel_capacity(&sab) - parallel_capacity(&sa) - parallel_capacity(&sb)).abs() <= 1e-12 * parallel_capacity(&sab).max(1.0));
        prop_assert!((parallel_dispersion(&sab) - parallel_dispersion(&sa) - parallel_dispersion(&sb)).abs() <= 1e-12 * parallel_dispersion(&sab).max(1.0));
    }

    #[test]
    fn single_path_reduces_to_scalar_formula(gamma in 1e-3f64..100.0, n in 16u64..4096, rate in 0.05f64..4.0) {
        let c = (1.0 + gamma).log2();
        let v = 2.0 * awgn_dispersion(gamma).unwrap();
        let direct = q_function(((n as f64) / v).sqrt() * (c - rate)).unwrap();
        let got = parallel_outage(&snrs(&[gamma]), n, rate).unwrap();
        prop_assert!((got - direct).abs() <= 1e-12 + 1e-9 * direct);
    }

    #[test]
    fn outage_non_increasing_above_threshold(v in prop::collection::vec(0.01f64..50.0, 1..8), i in 0usize..8, bump in 1e-3f64..10.0, n in 64u64..2048, rate in 0.1f64..3.0) {
        let i = i % v.len();
        let before = snrs(&v);
        prop_assume!(parallel_capacity(&before) >= rate);
        let mut w = v.clone();
        w[i] += bump;
        let p0 = parallel_outage(&before, n, rate).unwrap();
        let p1 = parallel_outage(&snrs(&w), n, rate).unwrap();
        prop_assert!(p1 <= p0 * (1.0 + 1e-12) + 1e-300);
    }
}
