//! Effective delay-Doppler channel matrix and frame log-det capacity.
//!
//! For a tap set `{(h_i, l_i, s_i)}` with `s_i = k_i + kappa_i` the effective
//! channel is
//!
//! ```text
//! H_DD = sum_i h_i (F_N ⊗ I_M) Pi^{l_i} Delta^{s_i} (F_N^H ⊗ I_M)
//! ```
//!
//! where `F_N` is the unitary N-point DFT, `Pi` the forward cyclic shift on
//! `MN` samples and `Delta = diag(alpha^0, ..., alpha^{MN-1})` with
//! `alpha = exp(j 2 pi / MN)`. Non-integer powers of `Delta` are taken on the
//! diagonal: `(Delta^s)_{qq} = exp(j 2 pi q s / MN)`.
//!
//! Writing `U = F_N ⊗ I_M` and `B = sum_i h_i Pi^{l_i} Delta^{s_i}`, the
//! channel is the unitary similarity `H_DD = U B U^H`. Construction builds the
//! sparse `B` and applies the block DFT on both sides; no dense permutation
//! or Kronecker factor is ever formed. The same similarity means
//! `det(I + g H_DD^H H_DD) = det(I + g B^H B)`, and `B^H B` is cyclically
//! banded with half-bandwidth equal to the delay spread, which
//! [`frame_capacity_bits_banded`] exploits.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LOG2_E, PI};

use num_complex::Complex64;

use crate::dd_channel::{OtfsGrid, TapSet};
use crate::error::{domain, Error, Result};

/// Dense `MN x MN` effective channel, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DdMatrix {
    grid: OtfsGrid,
    dim: usize,
    entries: Vec<Complex64>,
}

impl DdMatrix {
    pub fn zeros(grid: OtfsGrid) -> Self {
        let dim = grid.blocklength();
        Self { grid, dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(grid: OtfsGrid) -> Self {
        let mut h = Self::zeros(grid);
        for i in 0..h.dim {
            h.entries[i * h.dim + i] = Complex64::new(1.0, 0.0);
        }
        h
    }

    /// Wraps row-major entries; the length must be `(MN)^2`.
    pub fn from_entries(grid: OtfsGrid, entries: Vec<Complex64>) -> Result<Self> {
        let dim = grid.blocklength();
        if entries.len() != dim * dim {
            return Err(Error::Config(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { grid, dim, entries })
    }

    pub fn grid(&self) -> &OtfsGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// `F_N ⊗ I_M` and its adjoint applied to length-`MN` vectors, with the index
/// of bin `(doppler a, delay b)` at `a M + b`.
#[derive(Debug, Clone)]
pub struct BlockDft {
    m: usize,
    n: usize,
    twiddles: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl BlockDft {
    pub fn new(grid: &OtfsGrid) -> Self {
        let n = grid.n;
        let twiddles = (0..n)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Self { m: grid.m, n, twiddles, scratch: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// `x <- (F_N ⊗ I_M) x`.
    pub fn forward(&mut self, x: &mut [Complex64]) {
        self.transform(x, false);
    }

    /// `x <- (F_N^H ⊗ I_M) x`.
    pub fn inverse(&mut self, x: &mut [Complex64]) {
        self.transform(x, true);
    }

    fn transform(&mut self, x: &mut [Complex64], inverse: bool) {
        let (m, n) = (self.m, self.n);
        debug_assert_eq!(x.len(), m * n);
        let scale = 1.0 / libm::sqrt(n as f64);
        for b in 0..m {
            for (a, out) in self.scratch.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..n {
                    let w = self.twiddles[(a * c) % n];
                    let w = if inverse { w.conj() } else { w };
                    acc += w * x[c * m + b];
                }
                *out = acc * scale;
            }
            for a in 0..n {
                x[a * m + b] = self.scratch[a];
            }
        }
    }
}

fn check_taps(taps: &TapSet, grid: &OtfsGrid) -> Result<()> {
    grid.validate()?;
    if let Some(&d) = taps.delays().iter().find(|&&d| d >= grid.m) {
        return Err(Error::Config(format!("delay index {d} must be below M={}", grid.m)));
    }
    Ok(())
}

/// Nonzeros of column `q` of `B = sum_i h_i Pi^{l_i} Delta^{s_i}`: path `i`
/// contributes `h_i exp(j 2 pi q s_i / MN)` at row `(q + l_i) mod MN`.
fn time_domain_column(taps: &TapSet, dim: usize, q: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
    taps.gains().iter().zip(taps.delays()).zip(taps.dopplers()).map(move |((&h, &l), &s)| {
        let phase = 2.0 * PI * q as f64 * s / dim as f64;
        ((q + l) % dim, h * Complex64::new(libm::cos(phase), libm::sin(phase)))
    })
}

/// Builds the dense effective DD channel matrix.
pub fn build_h_dd(taps: &TapSet, grid: &OtfsGrid) -> Result<DdMatrix> {
    check_taps(taps, grid)?;
    let dim = grid.blocklength();
    let mut dft = BlockDft::new(grid);

    // columns of U B, stored as rows of (U B)^T
    let mut ub_t = vec![Complex64::new(0.0, 0.0); dim * dim];
    for q in 0..dim {
        let col = &mut ub_t[q * dim..(q + 1) * dim];
        for (row, value) in time_domain_column(taps, dim, q) {
            col[row] += value;
        }
        dft.forward(col);
    }

    // H = (U B) U^H, so row r of H is conj(U conj(row r of U B)).
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut row = vec![Complex64::new(0.0, 0.0); dim];
    for r in 0..dim {
        for (k, v) in row.iter_mut().enumerate() {
            *v = ub_t[k * dim + r].conj();
        }
        dft.forward(&mut row);
        for (dst, v) in entries[r * dim..(r + 1) * dim].iter_mut().zip(&row) {
            *dst = v.conj();
        }
    }
    Ok(DdMatrix { grid: *grid, dim, entries })
}

fn check_es_n0(es_n0: f64) -> Result<()> {
    if es_n0.is_finite() && es_n0 >= 0.0 {
        Ok(())
    } else {
        Err(domain("Es/N0", es_n0))
    }
}

/// `sum_k a_k conj(b_k)`.
#[inline]
fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re0, mut im0, mut re1, mut im1) = (0.0, 0.0, 0.0, 0.0);
    let mut ca = a.chunks_exact(2);
    let mut cb = b.chunks_exact(2);
    for (x, y) in (&mut ca).zip(&mut cb) {
        re0 += x[0].re * y[0].re + x[0].im * y[0].im;
        im0 += x[0].im * y[0].re - x[0].re * y[0].im;
        re1 += x[1].re * y[1].re + x[1].im * y[1].im;
        im1 += x[1].im * y[1].re - x[1].re * y[1].im;
    }
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        re0 += x.re * y.re + x.im * y.im;
        im0 += x.im * y.re - x.re * y.im;
    }
    Complex64::new(re0 + re1, im0 + im1)
}

/// In-place Cholesky of a Hermitian matrix held in the lower triangle of a
/// row-major `dim x dim` buffer. Returns `ln det`.
fn cholesky_ln_det(a: &mut [Complex64], dim: usize) -> Result<f64> {
    let mut ln_det = 0.0;
    for i in 0..dim {
        let (above, rest) = a.split_at_mut(i * dim);
        let row_i = &mut rest[..dim];
        for j in 0..i {
            let row_j = &above[j * dim..j * dim + dim];
            let s = row_i[j] - dot_conj(&row_i[..j], &row_j[..j]);
            row_i[j] = s / row_j[j].re;
        }
        let d = row_i[i].re - row_i[..i].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if d.is_nan() || d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { dim, pivot_index: i, pivot: d });
        }
        row_i[i] = Complex64::new(libm::sqrt(d), 0.0);
        ln_det += libm::log(d);
    }
    Ok(ln_det)
}

/// `log2 det(I + es_n0 H^H H)`, the number of bits one frame can carry.
///
/// Forms the Hermitian positive-definite matrix explicitly and factors it
/// with a Cholesky decomposition; the log-det is the sum of the logs of the
/// squared diagonal of the factor.
pub fn frame_capacity_bits(h: &DdMatrix, es_n0: f64) -> Result<f64> {
    check_es_n0(es_n0)?;
    if es_n0 == 0.0 {
        return Ok(0.0);
    }
    let dim = h.dim;
    // columns of H as contiguous rows
    let mut cols = vec![Complex64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            cols[c * dim + r] = h.entries[r * dim + c];
        }
    }
    let mut a = vec![Complex64::new(0.0, 0.0); dim * dim];
    for p in 0..dim {
        let col_p = &cols[p * dim..(p + 1) * dim];
        for q in 0..=p {
            // (H^H H)_{pq} = sum_r conj(H_rp) H_rq
            let g = dot_conj(col_p, &cols[q * dim..(q + 1) * dim]).conj();
            a[p * dim + q] = g * es_n0;
        }
        a[p * dim + p] += 1.0;
    }
    Ok(cholesky_ln_det(&mut a, dim)? * LOG2_E)
}

/// Lower triangle of a Hermitian matrix whose row `i` is zero left of `first[i]`.
#[derive(Debug, Clone)]
struct Envelope {
    first: Vec<usize>,
    rows: Vec<Vec<Complex64>>,
}

impl Envelope {
    fn cyclic_band(dim: usize, half_bandwidth: usize) -> Self {
        let first: Vec<usize> = (0..dim)
            .map(|i| if i + half_bandwidth >= dim { 0 } else { i.saturating_sub(half_bandwidth) })
            .collect();
        let rows = first.iter().enumerate().map(|(i, &f)| vec![Complex64::new(0.0, 0.0); i + 1 - f]).collect();
        Self { first, rows }
    }

    fn add(&mut self, i: usize, j: usize, value: Complex64) {
        let f = self.first[i];
        debug_assert!(j >= f && j <= i);
        self.rows[i][j - f] += value;
    }

    /// In-place envelope Cholesky; fill-in never leaves the envelope.
    fn cholesky_ln_det(&mut self) -> Result<f64> {
        let dim = self.rows.len();
        let mut ln_det = 0.0;
        for i in 0..dim {
            let fi = self.first[i];
            let (done, rest) = self.rows.split_at_mut(i);
            let row_i = &mut rest[0];
            for j in fi..i {
                let fj = self.first[j];
                let row_j = &done[j];
                let start = fi.max(fj);
                let s = row_i[j - fi] - dot_conj(&row_i[start - fi..j - fi], &row_j[start - fj..j - fj]);
                row_i[j - fi] = s / row_j[j - fj].re;
            }
            let off: f64 = row_i[..i - fi].iter().map(|z| z.norm_sqr()).sum();
            let d = row_i[i - fi].re - off;
            if d.is_nan() || d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { dim, pivot_index: i, pivot: d });
            }
            row_i[i - fi] = Complex64::new(libm::sqrt(d), 0.0);
            ln_det += libm::log(d);
        }
        Ok(ln_det)
    }
}

/// Same quantity as [`frame_capacity_bits`] for the channel `build_h_dd(taps, grid)`,
/// computed from the cyclically banded `I + es_n0 B^H B` without forming `H_DD`.
///
/// Cost is `O(MN d^2 + d (MN)^2)` for a delay spread `d` instead of `O((MN)^3)`.
pub fn frame_capacity_bits_banded(taps: &TapSet, grid: &OtfsGrid, es_n0: f64) -> Result<f64> {
    check_taps(taps, grid)?;
    check_es_n0(es_n0)?;
    if es_n0 == 0.0 {
        return Ok(0.0);
    }
    let dim = grid.blocklength();
    let lo = taps.delays().iter().copied().min().unwrap_or(0);
    let hi = taps.delays().iter().copied().max().unwrap_or(0);
    let mut a = Envelope::cyclic_band(dim, hi - lo);

    let columns: Vec<Vec<(usize, Complex64)>> =
        (0..dim).map(|q| time_domain_column(taps, dim, q).collect()).collect();
    // (B^H B)_{pq} = sum over rows m shared by columns p and q of conj(B_mp) B_mq
    for (q, col_q) in columns.iter().enumerate() {
        for &(m, b_mq) in col_q {
            for &l in taps.delays() {
                let p = (m + dim - l) % dim;
                if p < q {
                    continue;
                }
                if let Some(&(_, b_mp)) = columns[p].iter().find(|(row, _)| *row == m) {
                    a.add(p, q, b_mp.conj() * b_mq * es_n0);
                }
            }
        }
    }
    for i in 0..dim {
        a.add(i, i, Complex64::new(1.0, 0.0));
    }
    Ok(a.cholesky_ln_det()? * LOG2_E)
}

/// `true` when the frame cannot carry `k_bits` information bits, i.e.
/// `log2 det(I + es_n0 H^H H) < k_bits`.
pub fn theoretical_outage_indicator(h: &DdMatrix, es_n0: f64, k_bits: u64) -> Result<bool> {
    if k_bits == 0 {
        return Err(domain("information bits per frame", 0.0));
    }
    Ok(frame_capacity_bits(h, es_n0)? < k_bits as f64)
}
