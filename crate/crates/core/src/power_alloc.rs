//! Per-path transmit power allocation for the parallel-channel view of a
//! delay-Doppler realization.
//!
//! Each path `i` is treated as an independent AWGN channel with gain `|h_i|^2`
//! and receiver noise `sigma0^2`. Its equivalent noise `sigma0^2 / |h_i|^2`
//! orders the paths for water-filling.

use alloc::format;
use alloc::vec::Vec;

use crate::dd_channel::TapSet;
use crate::error::{Error, Result};
use crate::fbl_math::SnrVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub total_power: f64,
    pub noise_power: f64,
}

impl PowerBudget {
    pub fn new(total_power: f64, noise_power: f64) -> Result<Self> {
        for (name, v) in [("total power", total_power), ("noise power", noise_power)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { total_power, noise_power })
    }
}

/// How the swept `Es/N0` maps onto the allocation budget. Noise power is 1 in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TotalPowerModel {
    /// `W = L Es/N0`: under average allocation every path is driven at the
    /// full symbol energy, so path `i` sees SNR `Es/N0 |h_i|^2`.
    #[default]
    PerPath,
    /// `W = Es/N0`: the symbol energy is split across the `L` paths.
    Shared,
}

impl TotalPowerModel {
    pub fn budget(self, es_n0: f64, paths: usize) -> Result<PowerBudget> {
        let total = match self {
            TotalPowerModel::PerPath => es_n0 * paths as f64,
            TotalPowerModel::Shared => es_n0,
        };
        PowerBudget::new(total, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Average,
    WaterFilling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub powers: Vec<f64>,
    pub snrs: SnrVector,
    pub strategy: Strategy,
    /// Water level, present only for [`Strategy::WaterFilling`].
    pub water_level: Option<f64>,
}

/// `sigma0^2 / |h_i|^2` per path; `+inf` for a path with zero gain.
pub fn equivalent_noise(taps: &TapSet, noise_power: f64) -> Vec<f64> {
    taps.gain_powers()
        .map(|g| if g > 0.0 { noise_power / g } else { f64::INFINITY })
        .collect()
}

fn snrs_for(taps: &TapSet, powers: &[f64], noise_power: f64) -> Result<SnrVector> {
    SnrVector::new(taps.gain_powers().zip(powers).map(|(g, p)| p * g / noise_power).collect())
}

/// Equal split `W / L`; zero-gain paths still receive their share.
pub fn allocate_average(taps: &TapSet, budget: &PowerBudget) -> Result<Allocation> {
    let share = budget.total_power / taps.len() as f64;
    let powers = alloc::vec![share; taps.len()];
    let snrs = snrs_for(taps, &powers, budget.noise_power)?;
    Ok(Allocation { powers, snrs, strategy: Strategy::Average, water_level: None })
}

/// Water-filling `P_i = [lambda - eps_i]^+` with `sum P_i = W`.
pub fn allocate_waterfilling(taps: &TapSet, budget: &PowerBudget) -> Result<Allocation> {
    let noise = equivalent_noise(taps, budget.noise_power);
    let (powers, level) = water_fill(&noise, budget.total_power)?;
    let snrs = snrs_for(taps, &powers, budget.noise_power)?;
    Ok(Allocation { powers, snrs, strategy: Strategy::WaterFilling, water_level: Some(level) })
}

pub fn allocate(strategy: Strategy, taps: &TapSet, budget: &PowerBudget) -> Result<Allocation> {
    match strategy {
        Strategy::Average => allocate_average(taps, budget),
        Strategy::WaterFilling => allocate_waterfilling(taps, budget),
    }
}

/// Solves `sum_i [lambda - noise_i]^+ = total` exactly.
///
/// With the finite noise levels sorted ascending, the left side is linear in
/// `lambda` between consecutive levels, so the active set is the shortest
/// prefix whose closed-form level does not reach the next noise level.
/// Infinite levels never become active. Returns the powers and `lambda`.
pub fn water_fill(noise: &[f64], total: f64) -> Result<(Vec<f64>, f64)> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Config(format!("total power must be positive and finite, got {total}")));
    }
    if noise.iter().any(|e| e.is_nan() || *e < 0.0) {
        return Err(Error::Config("equivalent noise levels must be non-negative".into()));
    }
    let mut sorted: Vec<f64> = noise.iter().copied().filter(|e| e.is_finite()).collect();
    if sorted.is_empty() {
        return Err(Error::NoUsablePath);
    }
    sorted.sort_by(f64::total_cmp);

    let mut prefix = 0.0;
    let mut level = 0.0;
    for (k, &e) in sorted.iter().enumerate() {
        prefix += e;
        level = (total + prefix) / (k + 1) as f64;
        if sorted.get(k + 1).is_none_or(|&next| level <= next) {
            break;
        }
    }
    let powers = noise.iter().map(|&e| (level - e).max(0.0)).collect();
    Ok((powers, level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_complex::Complex64;

    fn taps_with_powers(powers: &[f64]) -> TapSet {
        TapSet::new(
            powers.iter().map(|&p| Complex64::new(libm::sqrt(p), 0.0)).collect(),
            (0..powers.len()).collect(),
            vec![0.0; powers.len()],
        )
        .unwrap()
    }

    #[test]
    fn equivalent_noise_examples() {
        let t = taps_with_powers(&[1.0, 0.25, 0.0]);
        let e = equivalent_noise(&t, 1.0);
        assert_eq!(e[0], 1.0);
        assert_eq!(e[1], 4.0);
        assert!(e[2].is_infinite());
    }

    #[test]
    fn average_examples() {
        let t = TapSet::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.5)],
            vec![0, 1],
            vec![0.0, 0.0],
        )
        .unwrap();
        let a = allocate_average(&t, &PowerBudget::new(4.0, 1.0).unwrap()).unwrap();
        assert_eq!(a.powers, vec![2.0, 2.0]);
        assert_eq!(a.snrs.as_slice(), &[2.0, 1.0]);
        assert_eq!(a.water_level, None);
        assert_eq!(a.powers.iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn water_fill_examples() {
        let (p, level) = water_fill(&[1.0, 3.0], 4.0).unwrap();
        assert_eq!(level, 4.0);
        assert_eq!(p, vec![3.0, 1.0]);

        let (p, level) = water_fill(&[1.0, 10.0], 2.0).unwrap();
        assert_eq!(level, 3.0);
        assert_eq!(p, vec![2.0, 0.0]);

        let (p, _) = water_fill(&[0.7; 5], 3.0).unwrap();
        for x in p {
            assert!((x - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn water_fill_skips_dead_paths() {
        let (p, level) = water_fill(&[f64::INFINITY, 2.0, f64::INFINITY], 1.5).unwrap();
        assert_eq!(p, vec![0.0, 1.5, 0.0]);
        assert_eq!(level, 3.5);
        assert_eq!(water_fill(&[f64::INFINITY; 3], 1.0), Err(Error::NoUsablePath));
    }

    #[test]
    fn waterfilling_allocation_snrs() {
        let t = taps_with_powers(&[1.0, 1.0 / 3.0]);
        let a = allocate_waterfilling(&t, &PowerBudget::new(4.0, 1.0).unwrap()).unwrap();
        assert_eq!(a.water_level, Some(4.0));
        assert!((a.snrs.as_slice()[0] - 3.0).abs() < 1e-12);
        assert!((a.snrs.as_slice()[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gain_average_gets_share_but_no_snr() {
        let t = taps_with_powers(&[0.0, 1.0]);
        let a = allocate_average(&t, &PowerBudget::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(a.powers, vec![1.0, 1.0]);
        assert_eq!(a.snrs.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn budget_validation() {
        assert!(PowerBudget::new(0.0, 1.0).is_err());
        assert!(PowerBudget::new(1.0, f64::NAN).is_err());
        assert_eq!(TotalPowerModel::PerPath.budget(2.0, 3).unwrap().total_power, 6.0);
        assert_eq!(TotalPowerModel::Shared.budget(2.0, 3).unwrap().total_power, 2.0);
    }
}
