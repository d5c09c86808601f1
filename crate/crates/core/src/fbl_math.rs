//! Finite-blocklength normal approximation for scalar and parallel AWGN channels.
//!
//! Rates are measured in bits per channel use. A complex path with SNR `a`
//! counts as two real subchannels that each see SNR `a`, so a parallel
//! channel of `L` complex paths has `2L` real subchannels and its capacity is
//! `sum log2(1 + a_j)`. [`parallel_capacity`] and [`parallel_dispersion`] are
//! the only places where that expansion happens.
//!
//! The `O(log n / n)` correction of the normal approximation is dropped.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, LOG2_E};

use crate::error::{domain, Error, Result};

/// Square of `log2(e)`, the unit conversion for dispersions in bits².
const LOG2_E_SQ: f64 = LOG2_E * LOG2_E;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Gaussian tail probability `Q(x) = P[Z > x]` for a standard normal `Z`.
pub fn q_function(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("q_function argument", x));
    }
    Ok(q_unchecked(x))
}

#[inline]
fn q_unchecked(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

#[inline]
fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

/// Inverse of [`q_function`] on the open interval `(0, 1)`.
///
/// Solves `ln Q(x) = ln p` by Newton iteration in the log domain, which keeps
/// the step well scaled deep in the tail, and falls back to bisection
/// whenever a step leaves the current bracket.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain("q_inverse probability", p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-upper_tail_inverse(1.0 - p));
    }
    Ok(upper_tail_inverse(p))
}

/// Root of `Q(x) = p` for `0 < p < 1/2`, so `x > 0`.
fn upper_tail_inverse(p: f64) -> f64 {
    const LOG_TOL: f64 = 1e-14;
    const STEP_TOL: f64 = 1e-15;
    let target = libm::log(p);
    // Q(40) underflows to zero, which brackets every positive double.
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    let mut x = libm::sqrt(-2.0 * target).min(hi);
    for _ in 0..200 {
        let q = q_unchecked(x);
        if q <= 0.0 {
            hi = x;
            x = 0.5 * (lo + hi);
            continue;
        }
        let g = libm::log(q) - target;
        if g.abs() <= LOG_TOL {
            break;
        }
        if g > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx ln Q(x) = -pdf(x) / Q(x)
        let slope = -normal_pdf(x) / q;
        let mut next = x - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= STEP_TOL * x || hi - lo <= STEP_TOL * x {
            break;
        }
    }
    x
}

fn check_snr(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(domain("SNR", gamma))
    }
}

/// Capacity of a real AWGN channel, `log2(1 + gamma) / 2`.
pub fn awgn_capacity(gamma: f64) -> Result<f64> {
    check_snr(gamma)?;
    Ok(0.5 * libm::log1p(gamma) * LOG2_E)
}

/// Dispersion of a real AWGN channel, `gamma (2 + gamma) log2(e)^2 / (2 (1 + gamma)^2)`.
pub fn awgn_dispersion(gamma: f64) -> Result<f64> {
    check_snr(gamma)?;
    Ok(dispersion_unchecked(gamma))
}

#[inline]
fn dispersion_unchecked(gamma: f64) -> f64 {
    let one_plus = 1.0 + gamma;
    let ratio = gamma * (2.0 + gamma) / (one_plus * one_plus);
    0.5 * ratio * LOG2_E_SQ
}

fn check_blocklength(n: u64) -> Result<()> {
    if n == 0 {
        Err(domain("blocklength", 0.0))
    } else {
        Ok(())
    }
}

/// Maximal coding rate `C - sqrt(V / n) Q^{-1}(epsilon)` of a real AWGN channel.
///
/// May be negative for very short blocks; callers clamp if they need to.
pub fn achievable_rate(gamma: f64, n: u64, epsilon: f64) -> Result<f64> {
    check_blocklength(n)?;
    let capacity = awgn_capacity(gamma)?;
    let dispersion = awgn_dispersion(gamma)?;
    let backoff = q_inverse(epsilon)?;
    Ok(capacity - libm::sqrt(dispersion / n as f64) * backoff)
}

/// Outage (block error) probability of a real AWGN channel at SNR `gamma`
/// coded at `rate` bits per use over `n` uses.
pub fn scalar_outage(gamma: f64, n: u64, rate: f64) -> Result<f64> {
    FblPoint::scalar(gamma, n, rate)?.outage()
}

/// Per-path SNRs of a parallel channel. Non-empty, every entry finite and `>= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrVector(Vec<f64>);

impl SnrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("SNR vector length", 0.0));
        }
        for &v in &values {
            check_snr(v)?;
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for SnrVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl AsRef<[f64]> for SnrVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Capacity of `L` complex parallel paths, i.e. `2L` real subchannels.
pub fn parallel_capacity(snrs: &SnrVector) -> f64 {
    // two real halves of 0.5 * log2(1 + a) each
    snrs.0.iter().map(|&a| libm::log1p(a) * LOG2_E).sum()
}

/// Dispersion of `L` complex parallel paths, twice the sum of the real-channel dispersions.
pub fn parallel_dispersion(snrs: &SnrVector) -> f64 {
    snrs.0.iter().map(|&a| 2.0 * dispersion_unchecked(a)).sum()
}

/// Outage probability of a codeword of rate `rate_rc` spread over `n` uses
/// of the parallel channel described by `snrs`.
pub fn parallel_outage(snrs: &SnrVector, n: u64, rate_rc: f64) -> Result<f64> {
    FblPoint::parallel(snrs, n, rate_rc)?.outage()
}

/// Capacity, dispersion, blocklength and rate of one channel state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblPoint {
    pub capacity_bits_per_use: f64,
    pub dispersion_bits2_per_use: f64,
    pub blocklength: u64,
    pub rate_bits_per_use: f64,
}

impl FblPoint {
    pub fn scalar(gamma: f64, n: u64, rate: f64) -> Result<Self> {
        Self::from_parts(awgn_capacity(gamma)?, awgn_dispersion(gamma)?, n, rate)
    }

    pub fn parallel(snrs: &SnrVector, n: u64, rate: f64) -> Result<Self> {
        Self::from_parts(parallel_capacity(snrs), parallel_dispersion(snrs), n, rate)
    }

    fn from_parts(capacity: f64, dispersion: f64, n: u64, rate: f64) -> Result<Self> {
        check_blocklength(n)?;
        if !rate.is_finite() {
            return Err(domain("coding rate", rate));
        }
        Ok(Self {
            capacity_bits_per_use: capacity,
            dispersion_bits2_per_use: dispersion,
            blocklength: n,
            rate_bits_per_use: rate,
        })
    }

    /// `Q(sqrt(n / V) (C - R))`. With `V = 0` the channel is deterministic
    /// and the outage is the indicator of `C < R`.
    pub fn outage(&self) -> Result<f64> {
        let margin = self.capacity_bits_per_use - self.rate_bits_per_use;
        if self.dispersion_bits2_per_use <= 0.0 {
            return Ok(if margin >= 0.0 { 0.0 } else { 1.0 });
        }
        let z = libm::sqrt(self.blocklength as f64 / self.dispersion_bits2_per_use) * margin;
        q_function(z)
    }
}
