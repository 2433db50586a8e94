//! Wavelet coefficients of a uniformly sampled signal on a regular grid
//! of analysis positions.
//!
//! `W(b) = sum_j conj(psi(t_j - b)) X(t_j) dt` over the grid points
//! inside the wavelet's truncated time support around `b`. The signal is
//! piecewise constant by construction, so a plain Riemann sum is exact up
//! to the wavelet's own smoothness; refinement stability is covered by
//! tests.

use crate::error::{Error, Result};
use crate::rr::UniformSeries;
use crate::wavelet::{BandSpec, FittedWavelet};
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt::Write as _;

/// Complex wavelet coefficients on a uniform grid of positions.
#[derive(Debug, Clone)]
pub struct CoefficientSeries {
    pub band: BandSpec,
    pub b_step: f64,
    /// Position times in seconds, uniform.
    pub positions: Vec<f64>,
    pub coeffs: Vec<Complex64>,
    /// modulus[k] == coeffs[k].norm()
    pub modulus: Vec<f64>,
    /// true where the wavelet support overflows the recording
    pub edge_mask: Vec<bool>,
}

impl CoefficientSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Modulus with edge flags propagated.
    pub fn band_energy(&self, squared: bool) -> Vec<f64> {
        self.modulus
            .iter()
            .map(|&m| if squared { m * m } else { m })
            .collect()
    }

    /// Positions and modulus restricted to interior (non-edge) entries.
    pub fn interior(&self) -> (Vec<f64>, Vec<f64>) {
        let mut pos = Vec::new();
        let mut vals = Vec::new();
        for k in 0..self.len() {
            if !self.edge_mask[k] {
                pos.push(self.positions[k]);
                vals.push(self.modulus[k]);
            }
        }
        (pos, vals)
    }

    /// CSV `b,re,im,modulus,edge`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 48 + 32);
        out.push_str("b,re,im,modulus,edge\n");
        for k in 0..self.len() {
            let c = self.coeffs[k];
            let _ = writeln!(
                out,
                "{:.1},{:.8e},{:.8e},{:.8e},{}",
                self.positions[k],
                c.re,
                c.im,
                self.modulus[k],
                u8::from(self.edge_mask[k]),
            );
        }
        out
    }

    /// Parse the CSV written by [`CoefficientSeries::to_csv`].
    pub fn from_csv(text: &str, band: BandSpec) -> Result<Self> {
        let mut positions = Vec::new();
        let mut coeffs = Vec::new();
        let mut modulus = Vec::new();
        let mut edge_mask = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('b') || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::input(format!(
                    "expected 5 fields at line {}",
                    idx + 1
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::input(format!("bad number {s:?} at line {}", idx + 1)))
            };
            positions.push(parse(fields[0])?);
            coeffs.push(Complex64::new(parse(fields[1])?, parse(fields[2])?));
            modulus.push(parse(fields[3])?);
            edge_mask.push(fields[4].trim() == "1");
        }
        if positions.is_empty() {
            return Err(Error::input("empty coefficient CSV"));
        }
        let b_step = if positions.len() > 1 {
            positions[1] - positions[0]
        } else {
            1.0
        };
        Ok(CoefficientSeries {
            band,
            b_step,
            positions,
            coeffs,
            modulus,
            edge_mask,
        })
    }
}

/// Compute wavelet coefficients of `signal` at positions spaced
/// `b_step` apart.
///
/// With `include_edges` false (the default pipeline behavior) only
/// positions whose full truncated support fits inside the recording are
/// emitted and the edge mask is all false. With it true, every grid
/// position inside the recording is emitted, integrating over the
/// clipped support and flagging the affected positions.
pub fn wavelet_coefficients(
    signal: &UniformSeries,
    wavelet: &FittedWavelet,
    b_step: f64,
    include_edges: bool,
) -> Result<CoefficientSeries> {
    if b_step <= 0.0 {
        return Err(Error::config(format!("b_step must be > 0, got {b_step}")));
    }
    let dt = signal.step;
    let nyquist_limit = 0.5 / wavelet.band.hi_hz;
    if dt > nyquist_limit + 1e-12 {
        return Err(Error::config(format!(
            "signal step {dt} s too coarse for band {} (need <= {nyquist_limit} s)",
            wavelet.band.name
        )));
    }
    let (s_lo, s_hi) = wavelet.time_support;
    let t0 = signal.start_time;
    let t_end = signal.end_time();
    let n = signal.values.len();

    // position grid: multiples of b_step from the signal start
    let eps = 1e-9 * b_step;
    let (m_min, m_max) = if include_edges {
        (0i64, ((t_end - t0) / b_step + eps).floor() as i64)
    } else {
        // first position whose support [b+s_lo, b+s_hi] fits the recording
        let lo = ((-s_lo) / b_step - eps).ceil().max(0.0) as i64;
        let hi = ((t_end - t0 - s_hi) / b_step + eps).floor() as i64;
        (lo, hi)
    };
    if m_max < m_min {
        return Err(Error::input(format!(
            "recording too short: no position can hold the {:.1} s wavelet support",
            s_hi - s_lo
        )));
    }

    let compute = |m: i64| -> (f64, Complex64, bool) {
        let b = t0 + m as f64 * b_step;
        // signal sample indices overlapping the support around b
        let j_lo = (((b + s_lo) - t0) / dt).ceil().max(0.0) as usize;
        let j_hi = ((((b + s_hi) - t0) / dt).floor() as usize).min(n - 1);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in j_lo..=j_hi {
            let t = t0 + j as f64 * dt;
            acc += wavelet.evaluate(t - b).conj() * signal.values[j];
        }
        let edge = b + s_lo < t0 - eps || b + s_hi > t_end + eps;
        (b, acc * dt, edge)
    };

    let rows: Vec<(f64, Complex64, bool)> = (m_min..=m_max).into_par_iter().map(compute).collect();

    let mut positions = Vec::with_capacity(rows.len());
    let mut coeffs = Vec::with_capacity(rows.len());
    let mut modulus = Vec::with_capacity(rows.len());
    let mut edge_mask = Vec::with_capacity(rows.len());
    for (b, c, e) in rows {
        positions.push(b);
        coeffs.push(c);
        modulus.push(c.norm());
        edge_mask.push(e);
    }
    Ok(CoefficientSeries {
        band: wavelet.band.clone(),
        b_step,
        positions,
        coeffs,
        modulus,
        edge_mask,
    })
}
