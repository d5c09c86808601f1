//! Random delay-Doppler channel realizations.
//!
//! A realization is a sparse set of `L` resolvable paths, each with a complex
//! gain, an integer delay index and a real Doppler index. Gains are complex
//! Gaussian with per-component variance `1 / (2L)`, so `E[sum |h_i|^2] = 1`.
//! Doppler indices follow the Jakes model: `nu = nu_max cos(theta)` with
//! `theta` uniform, which gives the arcsine (U-shaped) density on
//! `[-k_max, k_max]`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::error::{Error, Result};

/// Static OTFS frame geometry. The slot duration is `T = 1 / delta_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtfsGrid {
    /// Delay bins, i.e. symbols per slot.
    pub m: usize,
    /// Doppler bins, i.e. slots per frame.
    pub n: usize,
    /// Subcarrier spacing in Hz.
    pub delta_f: f64,
    /// Carrier frequency in Hz.
    pub f_c: f64,
}

impl OtfsGrid {
    pub fn new(m: usize, n: usize, delta_f: f64, f_c: f64) -> Result<Self> {
        let grid = Self { m, n, delta_f, f_c };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < 2 {
            return Err(Error::Config(format!(
                "grid needs M >= 2 and N >= 2, got M={} N={}",
                self.m, self.n
            )));
        }
        if !(self.delta_f.is_finite() && self.delta_f > 0.0) {
            return Err(Error::Config(format!("subcarrier spacing must be positive, got {}", self.delta_f)));
        }
        if !(self.f_c.is_finite() && self.f_c > 0.0) {
            return Err(Error::Config(format!("carrier frequency must be positive, got {}", self.f_c)));
        }
        Ok(())
    }

    /// Number of DD bins, `M N`. One codeword fills one frame.
    pub fn blocklength(&self) -> usize {
        self.m * self.n
    }

    pub fn slot_duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.slot_duration()
    }

    pub fn delay_resolution(&self) -> f64 {
        self.slot_duration() / self.m as f64
    }

    pub fn doppler_resolution(&self) -> f64 {
        1.0 / self.frame_duration()
    }

    /// Largest Doppler shift in Hz for a maximum Doppler index `k_max`.
    pub fn max_doppler_hz(&self, k_max: usize) -> f64 {
        k_max as f64 * self.doppler_resolution()
    }

    /// Terminal speed in m/s that produces `k_max` at this carrier.
    pub fn max_speed_mps(&self, k_max: usize) -> f64 {
        const SPEED_OF_LIGHT: f64 = 299_792_458.0;
        self.max_doppler_hz(k_max) * SPEED_OF_LIGHT / self.f_c
    }
}

/// How delay indices are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayModel {
    /// First path at delay 0, the others distinct and uniform on `1..=l_max`.
    #[default]
    ZeroDelayFirst,
    /// All `L` delays distinct and uniform on `0..=l_max`.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// Number of resolvable paths `L`.
    pub paths: usize,
    pub l_max: usize,
    pub k_max: usize,
    /// Mean of each real gain component.
    pub mu: f64,
    pub grid: OtfsGrid,
    pub fractional_doppler: bool,
    pub delay_model: DelayModel,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.paths == 0 || self.paths > self.l_max + 1 {
            return Err(Error::Config(format!(
                "need 1 <= L <= l_max + 1 for distinct delays, got L={} l_max={}",
                self.paths, self.l_max
            )));
        }
        if self.l_max >= self.grid.m {
            return Err(Error::Config(format!(
                "l_max={} must be below M={}",
                self.l_max, self.grid.m
            )));
        }
        if 2 * self.k_max > self.grid.n {
            return Err(Error::Config(format!(
                "k_max={} exceeds N/2 with N={}",
                self.k_max, self.grid.n
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::Config(format!("gain mean must be finite, got {}", self.mu)));
        }
        Ok(())
    }

    /// Standard deviation of each real gain component, `sqrt(1 / (2L))`.
    pub fn component_std(&self) -> f64 {
        libm::sqrt(0.5 / self.paths as f64)
    }
}

/// One channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TapSet {
    gains: Vec<Complex64>,
    delays: Vec<usize>,
    dopplers: Vec<f64>,
}

impl TapSet {
    /// Checks equal lengths, at least one path, distinct delays and finite values.
    pub fn new(gains: Vec<Complex64>, delays: Vec<usize>, dopplers: Vec<f64>) -> Result<Self> {
        if gains.is_empty() || gains.len() != delays.len() || gains.len() != dopplers.len() {
            return Err(Error::Config(format!(
                "tap set needs equal non-zero lengths, got {} gains, {} delays, {} dopplers",
                gains.len(),
                delays.len(),
                dopplers.len()
            )));
        }
        for (i, d) in delays.iter().enumerate() {
            if delays[..i].contains(d) {
                return Err(Error::Config(format!("delay index {d} repeated")));
            }
        }
        if gains.iter().any(|g| !(g.re.is_finite() && g.im.is_finite()))
            || dopplers.iter().any(|v| !v.is_finite())
        {
            return Err(Error::Config("tap set contains non-finite values".into()));
        }
        Ok(Self { gains, delays, dopplers })
    }

    /// A single path, handy for deterministic experiments.
    pub fn single(gain: Complex64, delay: usize, doppler: f64) -> Result<Self> {
        Self::new(alloc::vec![gain], alloc::vec![delay], alloc::vec![doppler])
    }

    /// Checks the realization against the bounds of `cfg`.
    pub fn check_against(&self, cfg: &ChannelConfig) -> Result<()> {
        if self.len() != cfg.paths {
            return Err(Error::Config(format!("expected {} paths, got {}", cfg.paths, self.len())));
        }
        if let Some(&d) = self.delays.iter().find(|&&d| d > cfg.l_max) {
            return Err(Error::Config(format!("delay {d} exceeds l_max={}", cfg.l_max)));
        }
        let bound = cfg.k_max as f64 + 0.5;
        if let Some(&v) = self.dopplers.iter().find(|v| v.abs() > bound) {
            return Err(Error::Config(format!("Doppler index {v} outside +-{bound}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    /// Doppler indices `k_i + kappa_i`.
    pub fn dopplers(&self) -> &[f64] {
        &self.dopplers
    }

    /// Integer and fractional parts of path `i`'s Doppler index.
    pub fn doppler_parts(&self, i: usize) -> (i64, f64) {
        split_doppler(self.dopplers[i])
    }

    /// `|h_i|^2` per path.
    pub fn gain_powers(&self) -> impl Iterator<Item = f64> + '_ {
        self.gains.iter().map(|g| g.norm_sqr())
    }

    /// Multiplies every gain by `factor`.
    pub fn scale_gains(&mut self, factor: Complex64) {
        for g in &mut self.gains {
            *g *= factor;
        }
    }

    /// Reorders the paths by `order`, where `order[i]` is the old index of new path `i`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::Config("permutation length mismatch".into()));
        }
        Self::new(
            order.iter().map(|&i| self.gains[i]).collect(),
            order.iter().map(|&i| self.delays[i]).collect(),
            order.iter().map(|&i| self.dopplers[i]).collect(),
        )
    }
}

/// Splits a Doppler index into the nearest integer `k` and the residue
/// `kappa = value - k` in `(-1/2, 1/2]`. Ties round toward the lower integer.
pub fn split_doppler(value: f64) -> (i64, f64) {
    let k = libm::ceil(value - 0.5);
    (k as i64, value - k)
}

/// Draws one channel realization. Gains, delays and Doppler shifts are drawn
/// independently in that order.
pub fn sample_tapset<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> Result<TapSet> {
    cfg.validate()?;
    let paths = cfg.paths;

    let component = Normal::new(cfg.mu, cfg.component_std())
        .map_err(|e| Error::Config(format!("gain distribution: {e}")))?;
    let gains: Vec<Complex64> = (0..paths)
        .map(|_| {
            let re = component.sample(rng);
            let im = component.sample(rng);
            Complex64::new(re, im)
        })
        .collect();

    let delays: Vec<usize> = match cfg.delay_model {
        DelayModel::ZeroDelayFirst => {
            let mut d = Vec::with_capacity(paths);
            d.push(0);
            d.extend(index::sample(rng, cfg.l_max, paths - 1).into_iter().map(|i| i + 1));
            d
        }
        DelayModel::Uniform => index::sample(rng, cfg.l_max + 1, paths).into_vec(),
    };

    let angle = Uniform::new(0.0, 2.0 * PI);
    let nu_max = cfg.grid.max_doppler_hz(cfg.k_max);
    let frame = cfg.grid.frame_duration();
    let dopplers: Vec<f64> = (0..paths)
        .map(|_| {
            let nu = nu_max * libm::cos(angle.sample(rng));
            let index = nu * frame;
            if cfg.fractional_doppler {
                index
            } else {
                split_doppler(index).0 as f64
            }
        })
        .collect();

    Ok(TapSet { gains, delays, dopplers })
}

/// Total gain power `sum |h_i|^2`.
pub fn gain_power(taps: &TapSet) -> f64 {
    taps.gain_powers().sum()
}
