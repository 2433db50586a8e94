//! Locally stationary Gaussian signal generator.
//!
//! A signal is described by a piecewise-constant mean staircase plus,
//! on each spectral piece, a stationary Gaussian sample synthesized in
//! the frequency domain: independent complex Gaussian weights per
//! positive-frequency bin with amplitude set by the one-sided spectral
//! density, Hermitian-symmetrized, inverse FFT. Pieces are hard
//! concatenations.
//!
//! Normalization: the one-sided density of a rectangle (lo, hi, power)
//! is `2 * power` on [lo, hi] (the two sides folded together), so the
//! variance of a single-piece signal equals the total two-sided
//! spectral mass `sum 2 * power * (hi - lo)`.

use crate::error::{Error, Result};
use crate::rr::UniformSeries;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Band-limited rectangle of the two-sided spectral density: value
/// `power` on [lo, hi] and mirrored to [-hi, -lo].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rect {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanPiece {
    /// Start time of the piece in seconds.
    pub start: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralPiece {
    pub start: f64,
    #[serde(default, rename = "rect")]
    pub rects: Vec<Rect>,
}

/// Piecewise-constant mean and spectral density over [0, duration).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseSpec {
    pub duration: f64,
    pub sample_step: f64,
    #[serde(default, rename = "mean")]
    pub mean_pieces: Vec<MeanPiece>,
    #[serde(default, rename = "spectral")]
    pub spectral_pieces: Vec<SpectralPiece>,
}

impl PiecewiseSpec {
    pub fn from_toml_str(text: &str) -> Result<PiecewiseSpec> {
        let spec: PiecewiseSpec =
            toml::from_str(text).map_err(|e| Error::config(format!("bad signal spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn nyquist_hz(&self) -> f64 {
        0.5 / self.sample_step
    }

    // negated comparisons are deliberate: they reject NaN too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::config("duration must be > 0"));
        }
        if !(self.sample_step > 0.0) {
            return Err(Error::config("sample_step must be > 0"));
        }
        let check_starts = |name: &str, starts: &[f64]| -> Result<()> {
            if let Some(&first) = starts.first() {
                if first != 0.0 {
                    return Err(Error::config(format!(
                        "first {name} piece must start at 0, got {first}"
                    )));
                }
            }
            for w in starts.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::config(format!(
                        "{name} piece starts must be strictly increasing"
                    )));
                }
            }
            if let Some(&last) = starts.last() {
                if last >= self.duration {
                    return Err(Error::config(format!(
                        "{name} piece start {last} is not inside [0, {})",
                        self.duration
                    )));
                }
            }
            Ok(())
        };
        let mean_starts: Vec<f64> = self.mean_pieces.iter().map(|p| p.start).collect();
        let spec_starts: Vec<f64> = self.spectral_pieces.iter().map(|p| p.start).collect();
        check_starts("mean", &mean_starts)?;
        check_starts("spectral", &spec_starts)?;
        let nyq = self.nyquist_hz();
        for (i, piece) in self.spectral_pieces.iter().enumerate() {
            for r in &piece.rects {
                if !(r.lo_hz >= 0.0 && r.hi_hz > r.lo_hz) {
                    return Err(Error::config(format!(
                        "spectral piece {i}: rectangle needs 0 <= lo < hi, got ({}, {})",
                        r.lo_hz, r.hi_hz
                    )));
                }
                if !(r.power >= 0.0) {
                    return Err(Error::config(format!(
                        "spectral piece {i}: power must be >= 0, got {}",
                        r.power
                    )));
                }
                if r.hi_hz > nyq + 1e-12 {
                    return Err(Error::config(format!(
                        "spectral piece {i}: rectangle hi {} Hz exceeds Nyquist {} Hz",
                        r.hi_hz, nyq
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total two-sided spectral mass of piece `k` (the stationary
    /// variance of that piece).
    pub fn piece_variance(&self, k: usize) -> f64 {
        self.spectral_pieces[k]
            .rects
            .iter()
            .map(|r| 2.0 * r.power * (r.hi_hz - r.lo_hz))
            .sum()
    }

    fn one_sided_density(&self, k: usize, f_hz: f64) -> f64 {
        self.spectral_pieces[k]
            .rects
            .iter()
            .filter(|r| f_hz >= r.lo_hz && f_hz <= r.hi_hz)
            .map(|r| 2.0 * r.power)
            .sum()
    }

    fn sample_count(&self) -> usize {
        (self.duration / self.sample_step + 1e-9).round() as usize
    }

    /// Sample index of the first sample at or after time `t`.
    fn index_of(&self, t: f64) -> usize {
        (t / self.sample_step - 1e-9).ceil().max(0.0) as usize
    }

    /// Union of interior mean and spectral break times mapped to
    /// coefficient-grid indices by the floor rule.
    pub fn planted_truth(&self, b_step: f64) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .mean_pieces
            .iter()
            .skip(1)
            .map(|p| p.start)
            .chain(self.spectral_pieces.iter().skip(1).map(|p| p.start))
            .map(|t| (t / b_step + 1e-9).floor() as usize)
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Synthesize one realization. Deterministic in (spec, seed):
/// each spectral piece draws from its own RNG stream so piece-local
/// samples do not depend on the lengths of earlier pieces.
pub fn generate(spec: &PiecewiseSpec, seed: u64) -> Result<UniformSeries> {
    spec.validate()?;
    let n_total = spec.sample_count();
    if n_total == 0 {
        return Err(Error::config("duration shorter than one sample step"));
    }
    let dt = spec.sample_step;
    let mut values = vec![0.0f64; n_total];

    // stationary noise per spectral piece
    let mut planner = FftPlanner::<f64>::new();
    let n_pieces = spec.spectral_pieces.len();
    for k in 0..n_pieces {
        let lo = spec.index_of(spec.spectral_pieces[k].start);
        let hi = if k + 1 < n_pieces {
            spec.index_of(spec.spectral_pieces[k + 1].start)
        } else {
            n_total
        };
        let n = hi - lo;
        if n == 0 {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut bins = vec![Complex64::new(0.0, 0.0); n];
        let half = (n - 1) / 2;
        for m in 1..=half {
            let f = m as f64 / (n as f64 * dt);
            let g = spec.one_sided_density(k, f);
            // inverse FFT divides by n; pair (m, n-m) then carries
            // variance G(f) / (n dt), one bin of the one-sided sum
            let amp = (n as f64 * g / (4.0 * dt)).sqrt();
            let z = Complex64::new(standard_normal(&mut rng), standard_normal(&mut rng));
            bins[m] = amp * z;
            bins[n - m] = bins[m].conj();
        }
        let fft = planner.plan_fft_inverse(n);
        fft.process(&mut bins);
        for (j, b) in bins.iter().enumerate() {
            values[lo + j] = b.re / n as f64;
        }
    }

    // mean staircase
    let n_means = spec.mean_pieces.len();
    for l in 0..n_means {
        let lo = spec.index_of(spec.mean_pieces[l].start);
        let hi = if l + 1 < n_means {
            spec.index_of(spec.mean_pieces[l + 1].start)
        } else {
            n_total
        };
        let level = spec.mean_pieces[l].level;
        for v in &mut values[lo..hi] {
            *v += level;
        }
    }

    Ok(UniformSeries {
        start_time: 0.0,
        step: dt,
        values,
    })
}
