//! Acceptance battery. One test per criterion; each prints a single
//! `AC-n PASS/FAIL` line with the measured values before asserting.
//!
//! Known honest failures, analyzed in the project notes:
//! - AC-1: the recomputed in-band energy ratio of the true order-6
//!   Daubechies wavelet over its household pseudo support is 0.99844,
//!   below the required 0.999. The lambda check passes.
//! - AC-6: three of the eleven reference clock pairs (21912, 36022,
//!   70550) are internally inconsistent with the start time implied by
//!   the other eight; those three comparisons fail.

use hrvband::config::InputFormat;
use hrvband::pipeline::run_analyze;
use hrvband::segment::{index_to_clock, ClockTime, Segmenter};
use hrvband::synth::{generate, MeanPiece, PiecewiseSpec, Rect, SpectralPiece};
use hrvband::transform::wavelet_coefficients;
use hrvband::wavelet::{
    daubechies_mother, fit_by_scaling_modulation, fit_gabor, pseudo_support_ratio_fn,
    spectral_energy_fraction, BandSpec,
};
use hrvband::{RunConfig, UniformSeries};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "{criterion} {}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[test]
fn ac1_d6_fit_fidelity() {
    let t0 = Instant::now();
    let mother = daubechies_mother(6, 10).unwrap();
    let band = BandSpec::orthosympathetic();
    let fitted = fit_by_scaling_modulation(&mother, &band).unwrap();
    let lambda = fitted.scale;
    let ratio = spectral_energy_fraction(&fitted, band.lo_hz, band.hi_hz).unwrap();
    let lambda_ok = (lambda - 0.0659).abs() <= 5e-4;
    let ratio_ok = ratio >= 0.999;
    let elapsed = t0.elapsed();
    let pass = report(
        "AC-1",
        lambda_ok && ratio_ok && elapsed.as_secs() < 10,
        &format!(
            "lambda = {lambda:.6} (need 0.0659 +- 5e-4: {lambda_ok}), in-band ratio = {ratio:.6} (need >= 0.999: {ratio_ok}), {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

#[test]
fn ac2_gabor_pseudo_support() {
    let t0 = Instant::now();
    let envelope = |t: f64| {
        let norm = (2.0 * std::f64::consts::PI).powf(-0.25);
        Complex64::new(norm * (-t * t / 4.0).exp(), 0.0)
    };
    let ratio = pseudo_support_ratio_fn(envelope, (-9.0, 9.0), 1e-3, (-3.5, 3.5)).unwrap();
    let analytic = libm::erf(3.5 / std::f64::consts::SQRT_2);
    let elapsed = t0.elapsed();
    let pass = report(
        "AC-2",
        (ratio - 0.9995).abs() <= 1e-4 && elapsed.as_secs() < 1,
        &format!("ratio = {ratio:.7}, erf cross-check = {analytic:.7}, {elapsed:.2?}"),
    );
    assert!(pass);
    assert!((ratio - analytic).abs() < 1e-6);
}

#[test]
fn ac3_band_separation() {
    let t0 = Instant::now();
    let ortho = BandSpec::orthosympathetic();
    let para = BandSpec::parasympathetic();
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for band in [&ortho, &para] {
        let other = if band.name == ortho.name {
            &para
        } else {
            &ortho
        };
        let g = fit_gabor(band, 3.5).unwrap();
        let leak_g = spectral_energy_fraction(&g, other.lo_hz, other.hi_hz).unwrap();
        let mother = daubechies_mother(6, 10).unwrap();
        let d = fit_by_scaling_modulation(&mother, band).unwrap();
        let leak_d = spectral_energy_fraction(&d, other.lo_hz, other.hi_hz).unwrap();
        worst = worst.max(leak_g).max(leak_d);
        details.push(format!(
            "{} gabor {:.2e} d6 {:.2e}",
            band.name, leak_g, leak_d
        ));
    }
    let elapsed = t0.elapsed();
    let pass = report(
        "AC-3",
        worst <= 0.01 && elapsed.as_secs() < 10,
        &format!(
            "cross-band leaks: {}; worst {worst:.2e}, {elapsed:.2?}",
            details.join(", ")
        ),
    );
    assert!(pass);
}

/// Exhaustive best partition for the brute-force cross-check.
fn brute_force(data: &[f64], k: usize, lmin: usize) -> (f64, Vec<usize>) {
    fn contrast(data: &[f64], lo: usize, hi: usize, floor: f64) -> f64 {
        let seg = &data[lo..hi];
        let nk = seg.len() as f64;
        let mean = seg.iter().sum::<f64>() / nk;
        let var = (seg.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / nk).max(floor);
        nk * var.ln() + nk
    }
    let n = data.len();
    let gm = data.iter().sum::<f64>() / n as f64;
    let gv = data.iter().map(|&x| (x - gm) * (x - gm)).sum::<f64>() / n as f64;
    let floor = if gv > 0.0 { 1e-12 * gv } else { 1.0 };
    let mut best = (f64::INFINITY, Vec::new());
    let mut stack: Vec<(usize, usize, f64, Vec<usize>)> = vec![(0, 0, 0.0, Vec::new())];
    while let Some((start, depth, acc, cps)) = stack.pop() {
        if depth == k - 1 {
            if n - start >= lmin {
                let total = acc + contrast(data, start, n, floor);
                if total < best.0 {
                    best = (total, cps);
                }
            }
            continue;
        }
        let remaining = (k - 1 - depth - 1) * lmin + lmin;
        for cut in (start + lmin)..=(n.saturating_sub(remaining)) {
            let mut next = cps.clone();
            next.push(cut);
            stack.push((
                cut,
                depth + 1,
                acc + contrast(data, start, cut, floor),
                next,
            ));
        }
    }
    (best.0 / n as f64, best.1)
}

#[test]
fn ac4_segmentation_correctness() {
    let t0 = Instant::now();

    // (a) DP vs brute force, 100 random series, n <= 30, K <= 4
    let mut dp_mismatches = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(4001);
    for _ in 0..100 {
        let n = rng.gen_range(12..=30);
        let data: Vec<f64> = (0..n)
            .map(|_| {
                let scale = if rng.gen_bool(0.4) { 3.0 } else { 1.0 };
                scale * normal(&mut rng)
            })
            .collect();
        let seg = Segmenter {
            min_segment_length: 2,
            k_max: 4,
            stability_fraction: 0.5,
        };
        let path = seg.penalty_path(&data).unwrap();
        for k in 2..=4usize.min(path.costs.len()) {
            let (bf_cost, bf_cps) = brute_force(&data, k, 2);
            if (path.costs[k - 1] - bf_cost).abs() > 1e-9 || path.change_points[k - 1] != bf_cps {
                dp_mismatches += 1;
            }
        }
    }

    // (b) planted mean + variance changes, n = 5000, SNR >= 3
    let mut exact_k = 0usize;
    let mut tau_ok = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4100 + seed);
        let mut data: Vec<f64> = (0..1700).map(|_| normal(&mut rng)).collect();
        data.extend((0..1700).map(|_| 4.0 + normal(&mut rng))); // mean shift, SNR 4
        data.extend((0..1600).map(|_| 4.0 + 4.0 * normal(&mut rng))); // variance x16
        let seg = Segmenter::default().select_segmentation(&data).unwrap();
        if seg.k == 3 {
            exact_k += 1;
            let t1 = seg.change_points[0] as i64;
            let t2 = seg.change_points[1] as i64;
            if (t1 - 1700).unsigned_abs() <= 50 && (t2 - 3400).unsigned_abs() <= 50 {
                tau_ok += 1;
            }
        }
    }

    // (c) pure noise, n = 1000, expect K = 1
    let mut noise_k1 = 0usize;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4200 + seed);
        let data: Vec<f64> = (0..1000).map(|_| normal(&mut rng)).collect();
        if Segmenter::default().select_segmentation(&data).unwrap().k == 1 {
            noise_k1 += 1;
        }
    }

    let elapsed = t0.elapsed();
    let pass_a = dp_mismatches == 0;
    let pass_b = exact_k >= 45 && tau_ok >= 45;
    let pass_c = noise_k1 >= 180;
    let pass = report(
        "AC-4",
        pass_a && pass_b && pass_c && elapsed.as_secs() < 300,
        &format!(
            "(a) DP/brute mismatches {dp_mismatches}/100, (b) exact K {exact_k}/50 with tau in range {tau_ok}/50, (c) noise K=1 {noise_k1}/200, {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

#[test]
#[allow(clippy::field_reassign_with_default)]
fn ac5_end_to_end_regime_detection() {
    let t0 = Instant::now();
    // 2 h signal, parasympathetic-band power change at 3600 s; the
    // orthosympathetic rectangle is constant throughout.
    let spec = PiecewiseSpec {
        duration: 7200.0,
        sample_step: 0.25,
        mean_pieces: vec![MeanPiece {
            start: 0.0,
            level: 0.9,
        }],
        spectral_pieces: vec![
            SpectralPiece {
                start: 0.0,
                rects: vec![
                    Rect {
                        lo_hz: 0.06,
                        hi_hz: 0.13,
                        power: 2e-3,
                    },
                    Rect {
                        lo_hz: 0.2,
                        hi_hz: 0.3,
                        power: 1e-3,
                    },
                ],
            },
            SpectralPiece {
                start: 3600.0,
                rects: vec![
                    Rect {
                        lo_hz: 0.06,
                        hi_hz: 0.13,
                        power: 2e-3,
                    },
                    Rect {
                        lo_hz: 0.2,
                        hi_hz: 0.3,
                        power: 8e-3,
                    },
                ],
            },
        ],
    };
    let dir = tempfile::tempdir().unwrap();
    let signal = generate(&spec, 42).unwrap();
    let input = dir.path().join("signal.csv");
    std::fs::write(&input, signal.to_csv()).unwrap();
    let mut config = RunConfig::default();
    config.input = Some(input);
    config.format = InputFormat::Uniform;
    config.output_dir = Some(dir.path().join("out"));
    let analysis = run_analyze(&config).unwrap();

    let para = analysis
        .bands
        .iter()
        .find(|b| b.band.name == "parasympathetic")
        .unwrap();
    let ortho = analysis
        .bands
        .iter()
        .find(|b| b.band.name == "orthosympathetic")
        .unwrap();
    let para_hit = para
        .segmentation
        .change_points
        .iter()
        .any(|&cp| (para.positions[cp] - 3600.0).abs() <= 30.0);
    let ortho_clean = ortho.segmentation.change_points.is_empty();
    let elapsed = t0.elapsed();
    let para_times: Vec<f64> = para
        .segmentation
        .change_points
        .iter()
        .map(|&cp| para.positions[cp])
        .collect();
    let pass = report(
        "AC-5",
        para_hit && ortho_clean && elapsed.as_secs() < 120,
        &format!(
            "para change points at {para_times:?} s (target 3600 +- 30: {para_hit}), ortho K = {} (need 1: {ortho_clean}), {elapsed:.2?}",
            ortho.segmentation.k
        ),
    );
    assert!(pass);
}

#[test]
fn ac6_clock_time_consistency() {
    let t0 = Instant::now();
    let start = ClockTime::parse("05:50:30").unwrap();
    let pairs: [(usize, &str); 11] = [
        (28220, "13:40:50"),
        (33366, "15:06:36"),
        (71048, "01:34:38"),
        (11620, "09:04:10"),
        (21912, "11:45:42"),
        (28054, "13:38:04"),
        (31540, "14:36:10"),
        (36022, "15:50:22"),
        (40172, "17:00:02"),
        (52622, "20:27:32"),
        (70550, "01:26:40"),
    ];
    let mut bad = Vec::new();
    for (idx, want) in pairs {
        let got = index_to_clock(start, idx, 1.0).to_string();
        if got != want {
            bad.push(format!("{idx}: computed {got}, reference {want}"));
        }
    }
    let elapsed = t0.elapsed();
    let pass = report(
        "AC-6",
        bad.is_empty() && elapsed.as_secs() < 1,
        &format!(
            "{}/11 pairs match; mismatches: [{}], {elapsed:.2?}",
            11 - bad.len(),
            bad.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn ac7_transform_oracle() {
    let t0 = Instant::now();
    let band = BandSpec::orthosympathetic();
    let w = fit_gabor(&band, 3.5).unwrap();
    let tone = |f_hz: f64| UniformSeries {
        start_time: 0.0,
        step: 0.25,
        values: (0..2401)
            .map(|k| (2.0 * std::f64::consts::PI * f_hz * k as f64 * 0.25).cos())
            .collect(),
    };
    let mid = wavelet_coefficients(&tone(0.095), &w, 1.0, false).unwrap();
    // |W(b)| ~ 0.5 g_hat(2 pi (f - eta)), g_hat(xi) = (8 pi s^2)^(1/4) e^(-s^2 xi^2)
    let sigma = w.scale;
    let expect = 0.5 * (8.0 * std::f64::consts::PI * sigma * sigma).powf(0.25);
    let mut worst_rel: f64 = 0.0;
    for &m in &mid.modulus {
        worst_rel = worst_rel.max((m - expect).abs() / expect);
    }
    let out = wavelet_coefficients(&tone(0.7), &w, 1.0, false).unwrap();
    let out_max = out.modulus.iter().cloned().fold(0.0, f64::max);
    let mid_min = mid.modulus.iter().cloned().fold(f64::INFINITY, f64::min);
    let rejection = out_max / mid_min;
    let elapsed = t0.elapsed();
    let pass = report(
        "AC-7",
        worst_rel <= 0.02 && rejection <= 0.01 && elapsed.as_secs() < 30,
        &format!(
            "midband worst relative error {worst_rel:.4} (need <= 0.02), out-of-band/midband {rejection:.5} (need <= 0.01), {elapsed:.2?}"
        ),
    );
    assert!(pass);
}

#[test]
fn ac8_throughput() {
    // 100,000-sample series, both bands, both families; the Gabor /
    // Daubechies runtime ratio is reported but not gated.
    let n = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(8001);
    let signal = UniformSeries {
        start_time: 0.0,
        step: 0.25,
        values: (0..n).map(|_| 0.9 + 0.05 * normal(&mut rng)).collect(),
    };
    let bands = [BandSpec::orthosympathetic(), BandSpec::parasympathetic()];

    let t_gabor = Instant::now();
    for band in &bands {
        let w = fit_gabor(band, 3.5).unwrap();
        let series = wavelet_coefficients(&signal, &w, 1.0, false).unwrap();
        assert!(!series.is_empty());
    }
    let gabor_s = t_gabor.elapsed().as_secs_f64();

    let t_daub = Instant::now();
    let mother = daubechies_mother(6, 10).unwrap();
    for band in &bands {
        let w = fit_by_scaling_modulation(&mother, band).unwrap();
        let series = wavelet_coefficients(&signal, &w, 1.0, false).unwrap();
        assert!(!series.is_empty());
    }
    let daub_s = t_daub.elapsed().as_secs_f64();

    let pass = report(
        "AC-8",
        gabor_s < 60.0,
        &format!(
            "gabor both bands {gabor_s:.2} s (need < 60), daubechies both bands {daub_s:.2} s, daubechies/gabor ratio {:.2} (reported, not gated)",
            daub_s / gabor_s
        ),
    );
    assert!(pass);
}
