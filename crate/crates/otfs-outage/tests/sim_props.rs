//! Sweep-level contracts and independent cross-checks of the estimators.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use otfs_outage::sim::{
    estimate_lower_bound, estimate_lower_bound_with, estimate_theoretical, lower_bound_trial, point_seed,
    run_sweep, run_sweep_with_threads, theoretical_trial, trial_rng, trial_taps, CapacityRoute, Estimator, Point,
    SweepSpec,
};
use otfs_outage::csv::to_csv_string;
use otfs_outage_core::{
    build_h_dd, parallel_outage, ChannelConfig, DelayModel, OtfsGrid, SnrVector, Strategy, TapSet, TotalPowerModel,
};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn grid(m: usize, n: usize) -> OtfsGrid {
    OtfsGrid::new(m, n, 7.5e3, 4e9).unwrap()
}

fn channel(paths: usize, g: OtfsGrid) -> ChannelConfig {
    ChannelConfig {
        paths,
        l_max: g.m.min(9) - 1,
        k_max: g.n / 4,
        mu: 0.0,
        grid: g,
        fractional_doppler: true,
        delay_model: DelayModel::ZeroDelayFirst,
    }
}

fn small_spec(estimators: &[Estimator]) -> SweepSpec {
    let g = grid(4, 4);
    SweepSpec {
        grid: g,
        channel: channel(1, g),
        es_n0_grid_db: vec![4.0, -2.0, 10.0],
        coding_rates: vec![0.8, 0.5],
        path_counts: vec![2, 1],
        trials: 600,
        theoretical_trials: Some(300),
        base_seed: 42,
        estimators: estimators.iter().copied().collect::<BTreeSet<_>>(),
        power_model: TotalPowerModel::PerPath,
        blocklength: None,
        capacity_route: CapacityRoute::Banded,
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let spec = small_spec(&Estimator::ALL);
    let one = run_sweep_with_threads(&spec, 1).unwrap();
    let four = run_sweep_with_threads(&spec, 4).unwrap();
    assert_eq!(to_csv_string(&one), to_csv_string(&four));
    assert_eq!(one, four);
}

#[test]
fn grid_order_is_canonicalized() {
    let spec = small_spec(&[Estimator::LowerAvg, Estimator::Theoretical]);
    let mut shuffled = spec.clone();
    shuffled.es_n0_grid_db = vec![10.0, 4.0, -2.0];
    shuffled.coding_rates = vec![0.5, 0.8];
    shuffled.path_counts = vec![1, 2];
    assert_eq!(run_sweep(&spec).unwrap(), run_sweep(&shuffled).unwrap());
}

#[test]
fn row_cardinality() {
    let mut spec = small_spec(&[Estimator::LowerWat]);
    spec.coding_rates = vec![0.8];
    spec.path_counts = vec![2];
    let rows = run_sweep(&spec).unwrap().rows;
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[0].es_n0_db < w[1].es_n0_db));
}

#[test]
fn invalid_spec_is_rejected_before_work() {
    let mut spec = small_spec(&[]);
    spec.coding_rates = vec![1.5];
    spec.trials = 0;
    match run_sweep(&spec) {
        Err(otfs_outage::Error::Config(problems)) => assert!(problems.len() >= 3, "{problems:?}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn banded_and_dense_routes_agree() {
    let mut spec = small_spec(&[Estimator::Theoretical]);
    let banded = run_sweep(&spec).unwrap();
    spec.capacity_route = CapacityRoute::Dense;
    assert_eq!(banded, run_sweep(&spec).unwrap());
}

/// `Q(x)` from an independent normal-distribution implementation.
fn q(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().sf(x)
}

#[test]
fn single_path_bound_matches_independent_reimplementation() {
    let g = grid(4, 4);
    let point = Point {
        channel: channel(1, g),
        rate: 0.8,
        es_n0_db: 3.0,
        blocklength: 16,
        power_model: TotalPowerModel::PerPath,
    };
    let trials = 10_000;
    let est = estimate_lower_bound(&point, Strategy::Average, trials, 9).unwrap();

    // |h|^2 ~ Exp(1) for one Rayleigh path with unit mean power; fresh random stream
    let gamma = 10f64.powf(0.3);
    let log2e = std::f64::consts::LOG2_E;
    let mut rng = trial_rng(12345, 0);
    let values: Vec<f64> = (0..trials)
        .map(|_| {
            let alpha = gamma * -(1.0 - rng.gen::<f64>()).ln();
            let c = (1.0 + alpha).log2();
            let v = log2e * log2e * alpha * (2.0 + alpha) / (1.0 + alpha).powi(2);
            q((16.0 / v).sqrt() * (c - 0.8))
        })
        .collect();
    let mean = values.iter().sum::<f64>() / trials as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    let se_oracle = (var / trials as f64).sqrt();
    let se_est = est.half_width() / 1.959_963_984_540_054;
    let combined = (se_oracle * se_oracle + se_est * se_est).sqrt();
    assert!((est.mean - mean).abs() < 3.0 * combined, "{} vs {mean} (se {combined})", est.mean);
}

#[test]
fn theoretical_indicator_matches_eigenvalue_oracle_per_trial() {
    let g = grid(4, 4);
    let point = Point {
        channel: channel(2, g),
        rate: 0.8,
        es_n0_db: 2.0,
        blocklength: 16,
        power_model: TotalPowerModel::PerPath,
    };
    let seed = point_seed(3, Estimator::Theoretical, 2, 0.8, 2.0);
    let gamma = point.es_n0_linear();
    let k = point.information_bits() as f64;
    let mut outages = 0;
    for t in 0..1000 {
        let taps = trial_taps(&point.channel, seed, t).unwrap();
        let h = build_h_dd(&taps, &g).unwrap();
        let dense = DMatrix::from_row_slice(16, 16, h.entries());
        let bits: f64 = (dense.adjoint() * &dense)
            .symmetric_eigenvalues()
            .iter()
            .map(|&l| (1.0 + gamma * l.max(0.0)).log2())
            .sum();
        let oracle = bits < k;
        assert_eq!(theoretical_trial(&point, CapacityRoute::Banded, &taps).unwrap(), oracle, "trial {t}");
        assert_eq!(theoretical_trial(&point, CapacityRoute::Dense, &taps).unwrap(), oracle, "trial {t}");
        outages += oracle as u64;
    }
    let est = estimate_theoretical(&point, CapacityRoute::Banded, 1000, seed).unwrap();
    assert_eq!(est.mean, outages as f64 / 1000.0);
}

#[test]
fn three_atom_channel_is_estimated_without_bias() {
    let g = grid(4, 4);
    let point = Point {
        channel: channel(1, g),
        rate: 0.8,
        es_n0_db: 2.0,
        blocklength: 16,
        power_model: TotalPowerModel::PerPath,
    };
    let atoms = [(0.2, 0.3), (0.9, 0.5), (2.0, 0.2)];
    let gamma = point.es_n0_linear();
    let outage = |power: f64| parallel_outage(&SnrVector::new(vec![gamma * power]).unwrap(), 16, 0.8).unwrap();
    let exact: f64 = atoms.iter().map(|&(a, p)| p * outage(a)).sum();
    let second: f64 = atoms.iter().map(|&(a, p)| p * outage(a).powi(2)).sum();
    let trials = 100_000;
    let sigma = ((second - exact * exact) / trials as f64).sqrt();

    let est = estimate_lower_bound_with(&point, Strategy::Average, trials, |t| {
        let u: f64 = trial_rng(77, t).gen();
        let power: f64 = if u < 0.3 { 0.2 } else if u < 0.8 { 0.9 } else { 2.0 };
        TapSet::single(Complex64::new(power.sqrt(), 0.0), 0, 0.0)
    })
    .unwrap();
    assert!((est.mean - exact).abs() < 3.0 * sigma, "{} vs {exact} (sigma {sigma})", est.mean);
}

#[test]
fn per_path_budget_drives_each_path_at_full_symbol_energy() {
    let g = grid(4, 4);
    let taps = TapSet::new(
        vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.3, 0.4)],
        vec![0, 1, 2],
        vec![0.0; 3],
    )
    .unwrap();
    let point = Point {
        channel: channel(3, g),
        rate: 0.8,
        es_n0_db: 0.0,
        blocklength: 16,
        power_model: TotalPowerModel::PerPath,
    };
    let direct = parallel_outage(&SnrVector::new(taps.gain_powers().collect()).unwrap(), 16, 0.8).unwrap();
    assert_eq!(lower_bound_trial(&point, Strategy::Average, &taps).unwrap(), direct);
}
