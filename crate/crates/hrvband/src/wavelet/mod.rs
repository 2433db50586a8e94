//! Band-fitted complex wavelets.
//!
//! A mother wavelet with known frequency pseudo support gets mapped into a
//! prescribed frequency band by scaling and modulation:
//! `psi_band(t) = mu * exp(i*2*pi*eta*t) * psi(lambda*t)`. The scale factor
//! `lambda` stretches the mother's pseudo support to the band width, the
//! modulation `eta` slides it onto the band. Two families are provided:
//! the closed-form Gabor wavelet and tabulated Daubechies wavelets.
//!
//! Frequency convention: band edges and all reported frequencies are in Hz.
//! The mother's pseudo-support constants live on the same axis (cycles per
//! natural time unit of the mother), so the fitting arithmetic works in Hz
//! throughout; the time-domain modulation carries the `2*pi`.

pub mod daubechies;

pub use daubechies::daubechies_mother;

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::fmt::Write as _;

/// A frequency band, edges in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub name: String,
}

impl BandSpec {
    pub fn new(lo_hz: f64, hi_hz: f64, name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !(lo_hz > 0.0 && hi_hz > lo_hz) {
            return Err(Error::config(format!(
                "band {name:?}: need 0 < lo < hi, got lo={lo_hz}, hi={hi_hz}"
            )));
        }
        Ok(BandSpec { lo_hz, hi_hz, name })
    }

    /// Orthosympathetic (LF) band, 0.04-0.15 Hz.
    pub fn orthosympathetic() -> Self {
        BandSpec::new(0.04, 0.15, "orthosympathetic").unwrap()
    }

    /// Parasympathetic (HF) band, 0.15-0.5 Hz.
    pub fn parasympathetic() -> Self {
        BandSpec::new(0.15, 0.5, "parasympathetic").unwrap()
    }

    pub fn width(&self) -> f64 {
        self.hi_hz - self.lo_hz
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo_hz + self.hi_hz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletFamily {
    Gabor,
    Daubechies,
}

/// A mother wavelet tabulated on a uniform grid, with its declared
/// frequency pseudo support.
#[derive(Debug, Clone)]
pub struct MotherWavelet {
    pub family: WaveletFamily,
    pub samples: Vec<Complex64>,
    pub t_start: f64,
    pub dt: f64,
    /// Interval outside of which the table is zero (or negligible).
    pub time_support: (f64, f64),
    /// Declared frequency pseudo support (same unit as band edges).
    pub freq_pseudo_support: (f64, f64),
    /// Energy fraction the declared support actually contains.
    pub rho: f64,
    pub vanishing_moments: Option<usize>,
}

impl MotherWavelet {
    /// Linear interpolation of the table; zero outside.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let x = (t - self.t_start) / self.dt;
        if x < 0.0 || x > (self.samples.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = x.floor() as usize;
        if i + 1 >= self.samples.len() {
            return self.samples[self.samples.len() - 1];
        }
        let f = x - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }

    pub fn norm_l2(&self) -> f64 {
        let e: f64 = self.samples.iter().map(|c| c.norm_sqr()).sum();
        (e * self.dt).sqrt()
    }
}

/// Energy fraction of a tabulated function inside `[a, b]`.
///
/// Both integrals are Riemann sums over the tabulated window; the caller
/// is responsible for tabulating over a window that holds essentially all
/// of the energy.
pub fn pseudo_support_ratio_samples(
    samples: &[Complex64],
    t_start: f64,
    dt: f64,
    interval: (f64, f64),
) -> Result<f64> {
    let (a, b) = interval;
    if dt <= 0.0 {
        return Err(Error::config(format!(
            "quadrature step must be > 0, got {dt}"
        )));
    }
    if a > b {
        return Err(Error::config(format!("interval [{a}, {b}] is reversed")));
    }
    let mut total = 0.0;
    let mut inside = 0.0;
    for (k, c) in samples.iter().enumerate() {
        let t = t_start + k as f64 * dt;
        let e = c.norm_sqr();
        total += e;
        if t >= a && t <= b {
            inside += e;
        }
    }
    if total <= 0.0 {
        return Err(Error::config("zero total energy"));
    }
    Ok(inside / total)
}

/// [`pseudo_support_ratio_samples`] for a closure, sampled over `window`.
pub fn pseudo_support_ratio_fn(
    g: impl Fn(f64) -> Complex64,
    window: (f64, f64),
    step: f64,
    interval: (f64, f64),
) -> Result<f64> {
    if step <= 0.0 {
        return Err(Error::config(format!(
            "quadrature step must be > 0, got {step}"
        )));
    }
    if window.1 <= window.0 {
        return Err(Error::config("empty quadrature window"));
    }
    let n = ((window.1 - window.0) / step).ceil() as usize + 1;
    let samples: Vec<Complex64> = (0..n).map(|k| g(window.0 + k as f64 * step)).collect();
    pseudo_support_ratio_samples(&samples, window.0, step, interval)
}

/// The evaluation backend of a fitted wavelet.
#[derive(Debug, Clone)]
enum Kernel {
    /// Closed-form Gabor: `g_sigma(t) * exp(i*2*pi*eta*t)` where
    /// `|g_sigma|^2` is the N(0, sigma^2) density.
    Gabor,
    /// Tabulated mother, evaluated at `lambda * t`.
    Table {
        samples: Vec<Complex64>,
        t_start: f64,
        dt: f64,
    },
}

/// A complex wavelet fitted inside a frequency band.
#[derive(Debug, Clone)]
pub struct FittedWavelet {
    pub band: BandSpec,
    pub family: WaveletFamily,
    /// Amplitude mu, chosen for unit L2 norm.
    pub amplitude: f64,
    /// Modulation frequency eta in Hz.
    pub modulation_hz: f64,
    /// Scale: dimensionless lambda for a tabulated mother, sigma in
    /// seconds for Gabor.
    pub scale: f64,
    /// Window outside of which the wavelet is zero or negligible,
    /// seconds. Used as the integration support by the transform.
    pub time_support: (f64, f64),
    pub freq_pseudo_support: (f64, f64),
    pub rho: f64,
    kernel: Kernel,
}

impl FittedWavelet {
    pub fn evaluate(&self, t: f64) -> Complex64 {
        let envelope = match &self.kernel {
            Kernel::Gabor => {
                let sigma = self.scale;
                let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
                Complex64::new(norm * (-t * t / (4.0 * sigma * sigma)).exp(), 0.0)
            }
            Kernel::Table {
                samples,
                t_start,
                dt,
            } => {
                let u = self.scale * t;
                let x = (u - t_start) / dt;
                if x < 0.0 || x > (samples.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let i = x.floor() as usize;
                if i + 1 >= samples.len() {
                    samples[samples.len() - 1]
                } else {
                    let f = x - i as f64;
                    samples[i] * (1.0 - f) + samples[i + 1] * f
                }
            }
        };
        let phase = 2.0 * std::f64::consts::PI * self.modulation_hz * t;
        self.amplitude * envelope * Complex64::from_polar(1.0, phase)
    }

    /// L2 norm by quadrature over the support.
    pub fn norm_l2(&self, step: f64) -> f64 {
        let (lo, hi) = self.time_support;
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let e: f64 = (0..n)
            .map(|k| self.evaluate(lo + k as f64 * step).norm_sqr())
            .sum();
        (e * step).sqrt()
    }

    /// Tabulate the wavelet over its support at `step`.
    pub fn tabulate(&self, step: f64) -> (Vec<Complex64>, f64) {
        let (lo, hi) = self.time_support;
        let n = ((hi - lo) / step).ceil() as usize + 1;
        let v = (0..n)
            .map(|k| self.evaluate(lo + k as f64 * step))
            .collect();
        (v, lo)
    }

    /// CSV dump `t,re,im` for plotting.
    pub fn dump_csv(&self, step: f64) -> String {
        let (samples, t0) = self.tabulate(step);
        let mut out = String::from("t,re,im\n");
        for (k, c) in samples.iter().enumerate() {
            let t = t0 + k as f64 * step;
            let _ = writeln!(out, "{t:.6},{:.9e},{:.9e}", c.re, c.im);
        }
        out
    }
}

/// Power spectrum of a tabulated signal, returned as (frequencies in Hz,
/// |FT|^2 values). Covers both positive and negative frequencies.
pub fn power_spectrum(samples: &[Complex64], dt: f64, fft_len: usize) -> (Vec<f64>, Vec<f64>) {
    let m = fft_len
        .next_power_of_two()
        .max(samples.len().next_power_of_two());
    let mut buf: Vec<Complex64> = samples.to_vec();
    buf.resize(m, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let df = 1.0 / (m as f64 * dt);
    let mut freqs = Vec::with_capacity(m);
    let mut power = Vec::with_capacity(m);
    for (k, c) in buf.iter().enumerate() {
        let f = if k < m / 2 {
            k as f64 * df
        } else {
            (k as f64 - m as f64) * df
        };
        freqs.push(f);
        // scale by dt so this approximates the continuous FT
        power.push((c * dt).norm_sqr());
    }
    (freqs, power)
}

/// Fraction of a wavelet's spectral energy inside `[lo_hz, hi_hz]`,
/// recomputed numerically from a fine tabulation of the wavelet.
pub fn spectral_energy_fraction(w: &FittedWavelet, lo_hz: f64, hi_hz: f64) -> Result<f64> {
    let step = tabulation_step(w);
    let (samples, _) = w.tabulate(step);
    spectral_energy_fraction_samples(&samples, step, lo_hz, hi_hz)
}

pub fn spectral_energy_fraction_samples(
    samples: &[Complex64],
    dt: f64,
    lo_hz: f64,
    hi_hz: f64,
) -> Result<f64> {
    if hi_hz < lo_hz {
        return Err(Error::config("reversed frequency interval"));
    }
    let (freqs, power) = power_spectrum(samples, dt, samples.len() * 8);
    let total: f64 = power.iter().sum();
    if total <= 0.0 {
        return Err(Error::config("zero total spectral energy"));
    }
    let inside: f64 = freqs
        .iter()
        .zip(&power)
        .filter(|(f, _)| **f >= lo_hz && **f <= hi_hz)
        .map(|(_, p)| p)
        .sum();
    Ok(inside / total)
}

/// `xi_hz,power` CSV of the wavelet's spectrum, restricted to
/// `[-f_max, f_max]`.
pub fn spectrum_dump_csv(w: &FittedWavelet, f_max: f64) -> String {
    let step = tabulation_step(w);
    let (samples, _) = w.tabulate(step);
    let (freqs, power) = power_spectrum(&samples, step, samples.len() * 8);
    let mut rows: Vec<(f64, f64)> = freqs
        .into_iter()
        .zip(power)
        .filter(|(f, _)| f.abs() <= f_max)
        .collect();
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = String::from("xi_hz,power\n");
    for (f, p) in rows {
        let _ = writeln!(out, "{f:.6},{p:.9e}");
    }
    out
}

/// Tabulation step fine enough for the wavelet's highest frequency.
fn tabulation_step(w: &FittedWavelet) -> f64 {
    // at least 32 samples per cycle of the upper band edge
    let f_hi = w.freq_pseudo_support.1.max(w.modulation_hz.abs());
    (1.0 / (32.0 * f_hi)).min((w.time_support.1 - w.time_support.0) / 1024.0)
}

/// Fit a tabulated mother wavelet into `band` by scaling and modulation.
///
/// `lambda = band_width / (Lambda2 - Lambda1)` stretches the mother's
/// pseudo support to the band width; `eta = band_lo - lambda * Lambda1`
/// places the mapped support `eta + lambda * [Lambda1, Lambda2]` exactly
/// onto the band. Amplitude is set for unit L2 norm.
pub fn fit_by_scaling_modulation(mother: &MotherWavelet, band: &BandSpec) -> Result<FittedWavelet> {
    let (l1, l2) = mother.freq_pseudo_support;
    if l2 <= l1 {
        return Err(Error::config(format!(
            "mother wavelet has degenerate frequency pseudo support [{l1}, {l2}]"
        )));
    }
    let lambda = band.width() / (l2 - l1);
    let eta = band.lo_hz - lambda * l1;
    let mother_norm = mother.norm_l2();
    if mother_norm <= 0.0 {
        return Err(Error::config("mother wavelet has zero energy"));
    }
    // ||mu * psi(lambda t)||^2 = mu^2 / lambda * ||psi||^2
    let amplitude = lambda.sqrt() / mother_norm;
    let time_support = (
        mother.time_support.0 / lambda,
        mother.time_support.1 / lambda,
    );
    Ok(FittedWavelet {
        band: band.clone(),
        family: mother.family,
        amplitude,
        modulation_hz: eta,
        scale: lambda,
        time_support,
        freq_pseudo_support: (band.lo_hz, band.hi_hz),
        rho: mother.rho,
        kernel: Kernel::Table {
            samples: mother.samples.clone(),
            t_start: mother.t_start,
            dt: mother.dt,
        },
    })
}

/// Fit a Gabor wavelet into `band`.
///
/// The envelope `g_sigma` is the Gaussian with `|g_sigma|^2` equal to the
/// N(0, sigma^2) density, so its time pseudo support is `[-L*sigma,
/// L*sigma]` with `rho = erf(L/sqrt(2))` (0.9995 at L = 3.5). `sigma` is
/// chosen so the frequency pseudo support of the same mass equals the
/// band exactly, and `eta` is the band midpoint.
pub fn fit_gabor(band: &BandSpec, half_width: f64) -> Result<FittedWavelet> {
    if half_width <= 0.0 {
        return Err(Error::config(format!(
            "Gabor pseudo-support half-width must be > 0, got {half_width}"
        )));
    }
    let eta = band.midpoint();
    // |g_hat|^2 is Gaussian with std 1/(4*pi*sigma) Hz; match
    // L * std = half the band width.
    let sigma = half_width / (2.0 * std::f64::consts::PI * band.width());
    let rho = libm::erf(half_width / std::f64::consts::SQRT_2);
    // integration truncation: wide enough that the tail ripple stays
    // below the 1e-3 DC-rejection bound of the transform
    let trunc = (half_width + 1.5).max(5.0);
    Ok(FittedWavelet {
        band: band.clone(),
        family: WaveletFamily::Gabor,
        amplitude: 1.0, // g_sigma is unit-norm by construction
        modulation_hz: eta,
        scale: sigma,
        // integration support: +-4 sigma, beyond the +-L sigma pseudo support
        time_support: (-trunc * sigma, trunc * sigma),
        freq_pseudo_support: (band.lo_hz, band.hi_hz),
        rho,
        kernel: Kernel::Gabor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gabor_envelope(t: f64) -> Complex64 {
        // |g|^2 = standard normal density
        let norm = (2.0 * std::f64::consts::PI).powf(-0.25);
        Complex64::new(norm * (-t * t / 4.0).exp(), 0.0)
    }

    #[test]
    fn fitted_rho_is_erf_of_half_width() {
        let w = fit_gabor(&BandSpec::orthosympathetic(), 3.5).unwrap();
        assert!((w.rho - 0.9995).abs() < 1e-4, "rho {}", w.rho);
        assert!((w.rho - 0.999534741841929).abs() < 1e-12);
    }

    #[test]
    fn unit_gabor_pseudo_support_is_0_9995() {
        let r =
            pseudo_support_ratio_fn(unit_gabor_envelope, (-8.0, 8.0), 1e-3, (-3.5, 3.5)).unwrap();
        assert!((r - 0.9995).abs() < 1e-4, "ratio {r}");
        // analytic cross-check
        assert!((r - libm::erf(3.5 / std::f64::consts::SQRT_2)).abs() < 1e-6);
    }

    #[test]
    fn ratio_whole_window_is_one() {
        let r =
            pseudo_support_ratio_fn(unit_gabor_envelope, (-8.0, 8.0), 1e-3, (-8.0, 8.0)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_zero_width_interval_is_zero() {
        let r =
            pseudo_support_ratio_fn(unit_gabor_envelope, (-8.0, 8.0), 1e-3, (0.0, 0.0)).unwrap();
        assert!(r < 1e-3, "ratio {r}");
    }

    #[test]
    fn ratio_errors() {
        assert!(
            pseudo_support_ratio_fn(unit_gabor_envelope, (-8.0, 8.0), 0.0, (0.0, 1.0)).is_err()
        );
        assert!(
            pseudo_support_ratio_fn(unit_gabor_envelope, (-8.0, 8.0), 0.1, (1.0, 0.0)).is_err()
        );
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        assert!(pseudo_support_ratio_fn(zero, (-1.0, 1.0), 0.01, (0.0, 1.0)).is_err());
    }

    #[test]
    fn gabor_fit_orthosympathetic() {
        let w = fit_gabor(&BandSpec::orthosympathetic(), 3.5).unwrap();
        assert!((w.modulation_hz - 0.095).abs() < 1e-12);
        assert!((w.norm_l2(1e-3 * w.scale) - 1.0).abs() < 1e-6);
        let frac = spectral_energy_fraction(&w, 0.04, 0.15).unwrap();
        assert!(frac >= 0.999, "in-band fraction {frac}");
    }

    #[test]
    fn gabor_fit_parasympathetic_midpoint() {
        let w = fit_gabor(&BandSpec::parasympathetic(), 3.5).unwrap();
        assert!((w.modulation_hz - 0.325).abs() < 1e-12);
    }

    #[test]
    fn gabor_degenerate_band_rejected() {
        assert!(BandSpec::new(0.15, 0.15, "x").is_err());
        assert!(BandSpec::new(0.2, 0.1, "x").is_err());
    }

    #[test]
    fn identity_fit_is_fixed_point() {
        // mother whose declared pseudo support is already the band
        let band = BandSpec::orthosympathetic();
        let g = fit_gabor(&band, 3.5).unwrap();
        let step = g.scale * 1e-2;
        let (samples, t0) = g.tabulate(step);
        let mother = MotherWavelet {
            family: WaveletFamily::Gabor,
            samples,
            t_start: t0,
            dt: step,
            time_support: g.time_support,
            freq_pseudo_support: (band.lo_hz, band.hi_hz),
            rho: g.rho,
            vanishing_moments: None,
        };
        let fitted = fit_by_scaling_modulation(&mother, &band).unwrap();
        assert!((fitted.scale - 1.0).abs() < 1e-12);
        assert!(fitted.modulation_hz.abs() < 1e-12);
    }

    #[test]
    fn time_support_scaling_identity() {
        // |supp psi_band| * band_width == |supp mother| * Lambda_width
        let mother = daubechies::daubechies_mother(6, 10).unwrap();
        let band = BandSpec::orthosympathetic();
        let fitted = fit_by_scaling_modulation(&mother, &band).unwrap();
        let lhs = (fitted.time_support.1 - fitted.time_support.0) * band.width();
        let rhs = (mother.time_support.1 - mother.time_support.0)
            * (mother.freq_pseudo_support.1 - mother.freq_pseudo_support.0);
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs());
    }

    #[test]
    fn fitted_wavelets_unit_norm() {
        let for_bands = [BandSpec::orthosympathetic(), BandSpec::parasympathetic()];
        for band in &for_bands {
            let g = fit_gabor(band, 3.5).unwrap();
            assert!(
                (g.norm_l2(g.scale * 1e-3) - 1.0).abs() < 1e-6,
                "{}",
                band.name
            );
            let mother = daubechies::daubechies_mother(6, 10).unwrap();
            let d = fit_by_scaling_modulation(&mother, band).unwrap();
            let step = mother.dt / d.scale / 4.0;
            assert!((d.norm_l2(step) - 1.0).abs() < 1e-4, "{}", band.name);
        }
    }

    #[test]
    fn cross_band_leak_below_one_percent() {
        let ortho = BandSpec::orthosympathetic();
        let para = BandSpec::parasympathetic();
        let w1 = fit_gabor(&ortho, 3.5).unwrap();
        let w2 = fit_gabor(&para, 3.5).unwrap();
        let leak12 = spectral_energy_fraction(&w1, para.lo_hz, para.hi_hz).unwrap();
        let leak21 = spectral_energy_fraction(&w2, ortho.lo_hz, ortho.hi_hz).unwrap();
        assert!(leak12 <= 0.01, "ortho->para leak {leak12}");
        assert!(leak21 <= 0.01, "para->ortho leak {leak21}");
    }
}
