//! Daubechies mother wavelets, tabulated by cascade refinement of the
//! orthonormal filter and complexified through their analytic signal so
//! that modulation can place all of the spectral energy inside a target
//! band.

use super::{MotherWavelet, WaveletFamily};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Paper constants for the D6 frequency pseudo support.
pub const D6_PSEUDO_SUPPORT: (f64, f64) = (0.08, 1.75);

/// Extra window, in natural units, kept on each side of the compact
/// support to hold the tail of the analytic signal's imaginary part.
const ANALYTIC_PAD: f64 = 6.0;

/// Target coverage when measuring a pseudo support numerically.
const MEASURED_COVERAGE: f64 = 0.999;

/// Orthonormal low-pass filters, 2..=10 vanishing moments.
/// Generated by spectral factorization of the Daubechies polynomial;
/// each satisfies sum h = sqrt(2) and the double-shift orthogonality
/// relations to ~1e-12.
// tables keep 17 digits so the orthonormality residual stays at the
// f64 rounding level
#[allow(clippy::excessive_precision)]
pub fn lowpass_filter(vanishing_moments: usize) -> Result<&'static [f64]> {
    Ok(match vanishing_moments {
        2 => &[
            4.82962913144534267e-01,
            8.36516303737808053e-01,
            2.24143868042013389e-01,
            -1.29409522551260425e-01,
        ],
        3 => &[
            3.32670552950082576e-01,
            8.06891509311092436e-01,
            4.59877502118491543e-01,
            -1.35011020010254584e-01,
            -8.54412738820266582e-02,
            3.52262918857095333e-02,
        ],
        4 => &[
            2.30377813308896534e-01,
            7.14846570552915783e-01,
            6.30880767929858921e-01,
            -2.79837694168599029e-02,
            -1.87034811719093086e-01,
            3.08413818355607536e-02,
            3.28830116668851896e-02,
            -1.05974017850690421e-02,
        ],
        5 => &[
            1.60102397974192956e-01,
            6.03829269797189871e-01,
            7.24308528437773047e-01,
            1.38428145901320770e-01,
            -2.42294887066382303e-01,
            -3.22448695846384581e-02,
            7.75714938400457465e-02,
            -6.24149021279826483e-03,
            -1.25807519990820006e-02,
            3.33572528547377298e-03,
        ],
        6 => &[
            1.11540743350110480e-01,
            4.94623890398457111e-01,
            7.51133908021099694e-01,
            3.15250351709195964e-01,
            -2.26264693965445407e-01,
            -1.29766867567264021e-01,
            9.75016055873238890e-02,
            2.75228655303056437e-02,
            -3.15820393174865502e-02,
            5.53842201161556190e-04,
            4.77725751094557581e-03,
            -1.07730108530850128e-03,
        ],
        7 => &[
            7.78520540850093506e-02,
            3.96539319481917951e-01,
            7.29132090846235759e-01,
            4.69782287405192456e-01,
            -1.43906003928565784e-01,
            -2.24036184993874898e-01,
            7.13092192668304259e-02,
            8.06126091510830228e-02,
            -3.80299369350147118e-02,
            -1.65745416306667601e-02,
            1.25509985560999810e-02,
            4.29577972921350523e-04,
            -1.80164070404750690e-03,
            3.53713799974523222e-04,
        ],
        8 => &[
            5.44158422430891173e-02,
            3.12871590914224340e-01,
            6.75630736297165968e-01,
            5.85354683654191965e-01,
            -1.58291052561869913e-02,
            -2.84015542961419121e-01,
            4.72484573874639986e-04,
            1.28747426620428346e-01,
            -1.73693010017840939e-02,
            -4.40882539307791074e-02,
            1.39810279173873276e-02,
            8.74609404740320402e-03,
            -4.87035299344858695e-03,
            -3.91740373377090923e-04,
            6.75449406450204172e-04,
            -1.17476784124682473e-04,
        ],
        9 => &[
            3.80779473639192706e-02,
            2.43834674612827290e-01,
            6.04823123690589992e-01,
            6.57288078051537661e-01,
            1.33197385824527836e-01,
            -2.93273783279823841e-01,
            -9.68407832230068211e-02,
            1.48540749338371886e-01,
            3.07256814793101414e-02,
            -6.76328290614502392e-02,
            2.50947114856983795e-04,
            2.23616621237145534e-02,
            -4.72320475776686136e-03,
            -4.28150368246959720e-03,
            1.84764688306057571e-03,
            2.30385763523300219e-04,
            -2.51963188943234227e-04,
            3.93473203163656571e-05,
        ],
        10 => &[
            2.66700579006837260e-02,
            1.88176800078523165e-01,
            5.27201188933713483e-01,
            6.88459039455228683e-01,
            2.81172343659295276e-01,
            -2.49846424330452899e-01,
            -1.95946274378471064e-01,
            1.27369340336913550e-01,
            9.30573646039209307e-02,
            -7.13941471670410666e-02,
            -2.94575368219577756e-02,
            3.32126740596136241e-02,
            3.60655356693386549e-03,
            -1.07331754834120354e-02,
            1.39535174707543534e-03,
            1.99240529519860736e-03,
            -6.85856694966750910e-04,
            -1.16466855129784507e-04,
            9.35886703209001043e-05,
            -1.32642028946563630e-05,
        ],
        other => {
            return Err(Error::config(format!(
                "unsupported Daubechies order {other}: tabulated filters cover 2..=10"
            )))
        }
    })
}

/// Scaling-function values at integer points, from the refinement
/// relation's fixed point. Returned vector has length `filter_len - 1`
/// (phi vanishes at both ends of its support).
fn phi_at_integers(h: &[f64]) -> Vec<f64> {
    let n = h.len();
    let dim = n - 1;
    let sqrt2 = std::f64::consts::SQRT_2;
    // A[i][j] = sqrt(2) h[2i - j]; eigenvalues are 1, 1/2, 1/4, ...
    // so plain power iteration converges geometrically.
    let mut v = vec![1.0 / dim as f64; dim];
    let mut next = vec![0.0; dim];
    for _ in 0..200 {
        for (i, slot) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for (j, &vj) in v.iter().enumerate() {
                let k = 2 * i as isize - j as isize;
                if k >= 0 && (k as usize) < n {
                    s += sqrt2 * h[k as usize] * vj;
                }
            }
            *slot = s;
        }
        let sum: f64 = next.iter().sum();
        for slot in next.iter_mut() {
            *slot /= sum;
        }
        std::mem::swap(&mut v, &mut next);
    }
    v
}

/// Real Daubechies wavelet tabulated on a dyadic grid of resolution
/// `2^-refinement_level` over its compact support `[0, 2p - 1]`.
///
/// Returns `(values, dt)` with `values[n] = psi(n * dt)`.
pub fn cascade(vanishing_moments: usize, refinement_level: u32) -> Result<(Vec<f64>, f64)> {
    if refinement_level < 6 {
        return Err(Error::config(format!(
            "refinement level must be >= 6, got {refinement_level}"
        )));
    }
    let h = lowpass_filter(vanishing_moments)?;
    let n = h.len();
    let support = (n - 1) as f64;
    let sqrt2 = std::f64::consts::SQRT_2;

    // phi exactly at integers, then refine the dyadic grid one level at
    // a time with phi(t) = sqrt(2) sum_k h_k phi(2t - k).
    let ints = phi_at_integers(h);
    let mut phi: Vec<f64> = (0..n)
        .map(|i| if i < n - 1 { ints[i] } else { 0.0 })
        .collect();
    let mut level = 0u32;
    while level < refinement_level - 1 {
        let step_in = 1u64 << level;
        let m = (n - 1) * (1usize << (level + 1)) + 1;
        let mut next = vec![0.0; m];
        for (idx, slot) in next.iter_mut().enumerate() {
            // 2t at resolution 2^-level: index = idx (since t = idx/2^(level+1))
            let mut s = 0.0;
            for (k, &hk) in h.iter().enumerate() {
                let u_idx = idx as i64 - (k as u64 * step_in) as i64;
                if u_idx >= 0 && (u_idx as usize) < phi.len() {
                    s += hk * phi[u_idx as usize];
                }
            }
            *slot = sqrt2 * s;
        }
        phi = next;
        level += 1;
    }

    // psi at resolution 2^-J from phi at 2^-(J-1), via the QMF high-pass
    let g: Vec<f64> = (0..n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * h[n - 1 - k]
        })
        .collect();
    let step_in = 1u64 << (refinement_level - 1);
    let m = (n - 1) * (1usize << refinement_level) + 1;
    let mut psi = vec![0.0; m];
    for (idx, slot) in psi.iter_mut().enumerate() {
        let mut s = 0.0;
        for (k, &gk) in g.iter().enumerate() {
            let u_idx = idx as i64 - (k as u64 * step_in) as i64;
            if u_idx >= 0 && (u_idx as usize) < phi.len() {
                s += gk * phi[u_idx as usize];
            }
        }
        *slot = sqrt2 * s;
    }
    debug_assert_eq!(psi.len(), (support as usize) * (1 << refinement_level) + 1);
    Ok((psi, 1.0 / (1u64 << refinement_level) as f64))
}

/// Analytic-signal complexification of a real table: spectrum folded
/// onto positive frequencies, scaled by 1/sqrt(2) to preserve the L2
/// norm. The returned table is widened by `pad` on each side to hold
/// the imaginary part's tail.
fn analytic_table(real: &[f64], dt: f64, pad: f64) -> (Vec<Complex64>, f64) {
    let pad_n = (pad / dt).ceil() as usize;
    let len = real.len();
    let m = (4 * (len + 2 * pad_n)).next_power_of_two();
    let offset = (m - len) / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (i, &v) in real.iter().enumerate() {
        buf[offset + i] = Complex64::new(v, 0.0);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        if k == 0 || k == m / 2 {
            // DC and Nyquist stay (both ~0 for a wavelet)
        } else if k < m / 2 {
            *c *= 2.0;
        } else {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / (m as f64 * std::f64::consts::SQRT_2);
    let lo = offset - pad_n;
    let hi = offset + len + pad_n;
    let samples: Vec<Complex64> = buf[lo..hi].iter().map(|c| c * scale).collect();
    (samples, -(pad_n as f64) * dt)
}

/// Central interval containing `coverage` of the table's spectral
/// energy, plus the exact fraction inside it.
fn measured_pseudo_support(samples: &[Complex64], dt: f64, coverage: f64) -> ((f64, f64), f64) {
    let (freqs, power) = super::power_spectrum(samples, dt, samples.len() * 8);
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by(|&a, &b| freqs[a].partial_cmp(&freqs[b]).unwrap());
    let total: f64 = power.iter().sum();
    let tail = 0.5 * (1.0 - coverage);
    let mut cum = 0.0;
    let mut lo = freqs[order[0]];
    let mut hi = freqs[*order.last().unwrap()];
    let mut lo_set = false;
    for &i in &order {
        cum += power[i] / total;
        if !lo_set && cum >= tail {
            lo = freqs[i];
            lo_set = true;
        }
        if cum >= 1.0 - tail {
            hi = freqs[i];
            break;
        }
    }
    let inside: f64 = (0..freqs.len())
        .filter(|&i| freqs[i] >= lo && freqs[i] <= hi)
        .map(|i| power[i])
        .sum();
    ((lo, hi), inside / total)
}

/// Construct the Daubechies mother wavelet of the given order,
/// tabulated at resolution `2^-refinement_level` and complexified via
/// its analytic signal.
///
/// For order 6 the declared frequency pseudo support is the household
/// constant pair (0.08, 1.75); its actual energy fraction is measured
/// and stored in `rho`. Other orders declare a numerically measured
/// central interval.
pub fn daubechies_mother(vanishing_moments: usize, refinement_level: u32) -> Result<MotherWavelet> {
    if vanishing_moments < 2 {
        return Err(Error::config(format!(
            "need at least 2 vanishing moments, got {vanishing_moments}"
        )));
    }
    let (psi, dt) = cascade(vanishing_moments, refinement_level)?;
    let (samples, t_start) = analytic_table(&psi, dt, ANALYTIC_PAD);
    let t_end = t_start + (samples.len() - 1) as f64 * dt;
    let (support, rho) = if vanishing_moments == 6 {
        let frac = super::spectral_energy_fraction_samples(
            &samples,
            dt,
            D6_PSEUDO_SUPPORT.0,
            D6_PSEUDO_SUPPORT.1,
        )?;
        (D6_PSEUDO_SUPPORT, frac)
    } else {
        measured_pseudo_support(&samples, dt, MEASURED_COVERAGE)
    };
    Ok(MotherWavelet {
        family: WaveletFamily::Daubechies,
        samples,
        t_start,
        dt,
        time_support: (t_start, t_end),
        freq_pseudo_support: support,
        rho,
        vanishing_moments: Some(vanishing_moments),
    })
}
