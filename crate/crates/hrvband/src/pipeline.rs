//! Orchestration of the full analysis: ingest, per-band transform,
//! segmentation, and file reports. The CLI is a thin shell over this
//! module so everything here is testable in-process.

use crate::config::{InputFormat, RunConfig};
use crate::error::{Error, Result};
use crate::rr::{clean_artifacts, parse_rr, resample, UniformSeries};
use crate::segment::{index_to_clock, ClockTime, Segmentation};
use crate::synth::{generate, PiecewiseSpec};
use crate::transform::{wavelet_coefficients, CoefficientSeries};
use crate::wavelet::{
    daubechies_mother, fit_by_scaling_modulation, fit_gabor, BandSpec, FittedWavelet, WaveletFamily,
};
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

/// Everything computed for one frequency band.
#[derive(Debug, Clone)]
pub struct BandResult {
    pub band: BandSpec,
    pub coefficients: CoefficientSeries,
    /// Interior (non-edge) positions feeding the segmentation.
    pub positions: Vec<f64>,
    /// Interior modulus series.
    pub modulus: Vec<f64>,
    pub segmentation: Segmentation,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub signal_len: usize,
    pub signal_step: f64,
    pub bands: Vec<BandResult>,
}

/// Read and precondition the input signal according to the config.
pub fn load_signal(config: &RunConfig) -> Result<UniformSeries> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::config("no input file given"))?;
    match config.format {
        InputFormat::Uniform => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
            UniformSeries::from_csv(&text)
        }
        InputFormat::PeakTimes | InputFormat::Intervals => {
            let file = fs::File::open(path)
                .map_err(|e| Error::input(format!("cannot open {}: {e}", path.display())))?;
            let series = parse_rr(BufReader::new(file), config.rr_format().unwrap())?;
            let cleaned = clean_artifacts(&series, config.artifact_policy)?;
            resample(&cleaned, config.delta)
        }
    }
}

/// Build the fitted analysis wavelet for one band.
pub fn fitted_wavelet(config: &RunConfig, band: &BandSpec) -> Result<FittedWavelet> {
    match config.family {
        WaveletFamily::Gabor => fit_gabor(band, config.gabor_half_width),
        WaveletFamily::Daubechies => {
            let mother = daubechies_mother(config.daubechies_order, config.cascade_level as u32)?;
            fit_by_scaling_modulation(&mother, band)
        }
    }
}

/// Transform and segment one band.
pub fn analyze_band(
    config: &RunConfig,
    signal: &UniformSeries,
    band: &BandSpec,
) -> Result<BandResult> {
    let wavelet = fitted_wavelet(config, band)?;
    let coefficients = wavelet_coefficients(signal, &wavelet, config.b_step, config.include_edges)?;
    let (positions, modulus) = coefficients.interior();
    let segmentation = config.segmenter().select_segmentation(&modulus)?;
    Ok(BandResult {
        band: band.clone(),
        coefficients,
        positions,
        modulus,
        segmentation,
    })
}

/// Full in-memory pipeline (no file output).
pub fn analyze_signal(config: &RunConfig, signal: &UniformSeries) -> Result<AnalysisReport> {
    config.validate()?;
    let mut bands = Vec::with_capacity(config.bands.len());
    for bc in &config.bands {
        bands.push(analyze_band(config, signal, &bc.to_band())?);
    }
    Ok(AnalysisReport {
        signal_len: signal.len(),
        signal_step: signal.step,
        bands,
    })
}

fn file_tag(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn clock_at(start: Option<ClockTime>, position_s: f64) -> String {
    match start {
        Some(c) => index_to_clock(c, position_s.round() as usize, 1.0).to_string(),
        None => "-".into(),
    }
}

/// CSV rows describing a band's change points.
pub fn segmentation_csv(
    band: &BandSpec,
    positions: &[f64],
    seg: &Segmentation,
    start: Option<ClockTime>,
) -> String {
    let mut out = String::from(
        "index,clock_time,band,segment_mean_before,segment_mean_after,segment_var_before,segment_var_after\n",
    );
    for (k, &cp) in seg.change_points.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{:.8e},{:.8e},{:.8e},{:.8e}",
            cp,
            clock_at(start, positions[cp]),
            band.name,
            seg.segment_means[k],
            seg.segment_means[k + 1],
            seg.segment_vars[k],
            seg.segment_vars[k + 1],
        );
    }
    out
}

fn summary_text(report: &AnalysisReport, start: Option<ClockTime>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "signal: {} samples at {} s",
        report.signal_len, report.signal_step
    );
    for br in &report.bands {
        let seg = &br.segmentation;
        let _ = writeln!(
            out,
            "\nband {} ({}-{} Hz): K = {}, beta interval [{:.6e}, {:.6e}]",
            br.band.name,
            br.band.lo_hz,
            br.band.hi_hz,
            seg.k,
            seg.beta_interval.0,
            seg.beta_interval.1,
        );
        let mut bounds = vec![0usize];
        bounds.extend_from_slice(&seg.change_points);
        bounds.push(br.modulus.len());
        for s in 0..seg.k {
            let from = bounds[s];
            let to = bounds[s + 1];
            let _ = writeln!(
                out,
                "  segment {}: [{}, {}) clock [{}, {}] mean {:.6e} var {:.6e}",
                s + 1,
                from,
                to,
                clock_at(start, br.positions[from]),
                clock_at(start, br.positions[to - 1]),
                seg.segment_means[s],
                seg.segment_vars[s],
            );
        }
    }
    out
}

fn out_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| Error::config("no output directory given"))?;
    fs::create_dir_all(&dir)
        .map_err(|e| Error::input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)
        .map_err(|e| Error::input(format!("cannot write {}: {e}", path.display())))
}

/// The `analyze` subcommand: run the pipeline and write all reports.
/// Nothing is written until the whole analysis has succeeded.
pub fn run_analyze(config: &RunConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let start = config.recording_start_clock()?;
    let signal = load_signal(config)?;
    let report = analyze_signal(config, &signal)?;
    let dir = out_dir(config)?;
    for br in &report.bands {
        let tag = file_tag(&br.band.name);
        write_file(
            &dir.join(format!("coefficients_{tag}.csv")),
            &br.coefficients.to_csv(),
        )?;
        write_file(
            &dir.join(format!("segmentation_{tag}.csv")),
            &segmentation_csv(&br.band, &br.positions, &br.segmentation, start),
        )?;
    }
    write_file(&dir.join("summary.txt"), &summary_text(&report, start))?;
    write_file(&dir.join("effective_config.toml"), &config.to_toml_string())?;
    Ok(report)
}

/// The `synth` subcommand: generate a signal from a spec file and write
/// the signal CSV plus the planted-truth index file.
pub fn run_synth(config: &RunConfig, spec_path: &Path) -> Result<()> {
    config.validate()?;
    let text = fs::read_to_string(spec_path)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", spec_path.display())))?;
    let spec = PiecewiseSpec::from_toml_str(&text)?;
    let signal = generate(&spec, config.seed)?;
    let dir = out_dir(config)?;
    write_file(&dir.join("signal.csv"), &signal.to_csv())?;
    let truth = spec
        .planted_truth(config.b_step)
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("\n");
    write_file(&dir.join("truth.txt"), &(truth + "\n"))?;
    write_file(&dir.join("effective_config.toml"), &config.to_toml_string())?;
    Ok(())
}

/// The `plotdata` subcommand: project analyze outputs into gnuplot-ready
/// two-column files.
pub fn run_plotdata(config: &RunConfig) -> Result<()> {
    let dir = config
        .output_dir
        .clone()
        .ok_or_else(|| Error::config("no output directory given"))?;
    let entries = fs::read_dir(&dir)
        .map_err(|e| Error::input(format!("cannot read {}: {e}", dir.display())))?;
    let mut tags = Vec::new();
    for entry in entries {
        let name = entry
            .map_err(|e| Error::input(e.to_string()))?
            .file_name()
            .to_string_lossy()
            .into_owned();
        if let Some(rest) = name.strip_prefix("coefficients_") {
            if let Some(tag) = rest.strip_suffix(".csv") {
                tags.push(tag.to_string());
            }
        }
    }
    if tags.is_empty() {
        return Err(Error::input(format!(
            "no coefficients_*.csv found in {}",
            dir.display()
        )));
    }
    tags.sort();
    for tag in &tags {
        let coeff_text = fs::read_to_string(dir.join(format!("coefficients_{tag}.csv")))
            .map_err(|e| Error::input(format!("missing coefficients for {tag}: {e}")))?;
        let band = BandSpec {
            name: tag.clone(),
            lo_hz: 0.0,
            hi_hz: f64::INFINITY,
        };
        let series = CoefficientSeries::from_csv(&coeff_text, band)?;
        // (b, modulus), all rows
        let mut modulus_rows = String::new();
        for k in 0..series.len() {
            let _ = writeln!(
                modulus_rows,
                "{:.1} {:.8e}",
                series.positions[k], series.modulus[k]
            );
        }
        write_file(&dir.join(format!("{tag}_modulus.dat")), &modulus_rows)?;

        let (positions, modulus) = series.interior();
        let seg_text = fs::read_to_string(dir.join(format!("segmentation_{tag}.csv")))
            .map_err(|e| Error::input(format!("missing segmentation for {tag}: {e}")))?;
        let mut cps = Vec::new();
        for line in seg_text.lines().skip(1) {
            let first = line.split(',').next().unwrap_or("");
            if first.is_empty() {
                continue;
            }
            let idx: usize = first
                .parse()
                .map_err(|_| Error::input(format!("bad change-point index {first:?}")))?;
            if idx >= positions.len() {
                return Err(Error::input(format!(
                    "change-point index {idx} outside coefficient series"
                )));
            }
            cps.push(idx);
        }
        let mut marker_rows = String::new();
        for &cp in &cps {
            let _ = writeln!(marker_rows, "{:.1}", positions[cp]);
        }
        write_file(&dir.join(format!("{tag}_changes.dat")), &marker_rows)?;

        // step function: per-segment means recomputed from the modulus
        let mut bounds = vec![0usize];
        bounds.extend_from_slice(&cps);
        bounds.push(modulus.len());
        let mut step_rows = String::new();
        for w in bounds.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::input("unordered change-point indices"));
            }
            let seg = &modulus[w[0]..w[1]];
            let mean = seg.iter().sum::<f64>() / seg.len() as f64;
            for &b in &positions[w[0]..w[1]] {
                let _ = writeln!(step_rows, "{:.1} {:.8e}", b, mean);
            }
        }
        write_file(&dir.join(format!("{tag}_segments.dat")), &step_rows)?;
    }
    Ok(())
}

/// The `selftest` subcommand: quick internal consistency battery.
/// Returns the human-readable report; errors if any check fails.
pub fn run_selftest() -> Result<String> {
    let mut out = String::new();
    let mut check = |name: &str, ok: bool, detail: String| -> Result<()> {
        let _ = writeln!(out, "{} {name}: {detail}", if ok { "ok" } else { "FAIL" });
        if ok {
            Ok(())
        } else {
            Err(Error::internal(format!("selftest {name} failed: {detail}")))
        }
    };

    let ortho = BandSpec::orthosympathetic();
    let para = BandSpec::parasympathetic();

    let g = fit_gabor(&ortho, 3.5)?;
    let norm = g.norm_l2(0.05);
    check(
        "gabor-norm",
        (norm - 1.0).abs() < 1e-3,
        format!("{norm:.6}"),
    )?;

    let frac = crate::wavelet::spectral_energy_fraction(&g, ortho.lo_hz, ortho.hi_hz)?;
    check("gabor-in-band", frac >= 0.999, format!("{frac:.6}"))?;

    let mother = daubechies_mother(6, 8)?;
    let d = fit_by_scaling_modulation(&mother, &para)?;
    let dn = d.norm_l2(0.05);
    check("d6-norm", (dn - 1.0).abs() < 1e-3, format!("{dn:.6}"))?;

    let data: Vec<f64> = (0..100)
        .map(|i| if i < 50 { 1.0 } else { 5.0 } + 0.01 * ((i * 37 % 17) as f64 - 8.0))
        .collect();
    let seg = crate::segment::Segmenter::default().select_segmentation(&data)?;
    check(
        "segmenter-step",
        seg.k == 2 && seg.change_points == vec![50],
        format!("K={} cps={:?}", seg.k, seg.change_points),
    )?;

    Ok(out)
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;
    use crate::synth::{MeanPiece, Rect, SpectralPiece};

    fn two_change_spec() -> PiecewiseSpec {
        PiecewiseSpec {
            duration: 3000.0,
            sample_step: 0.25,
            mean_pieces: vec![MeanPiece {
                start: 0.0,
                level: 0.0,
            }],
            spectral_pieces: vec![
                SpectralPiece {
                    start: 0.0,
                    rects: vec![Rect {
                        lo_hz: 0.2,
                        hi_hz: 0.3,
                        power: 1e-3,
                    }],
                },
                SpectralPiece {
                    start: 1500.0,
                    rects: vec![Rect {
                        lo_hz: 0.2,
                        hi_hz: 0.3,
                        power: 8e-3,
                    }],
                },
            ],
        }
    }

    #[test]
    fn analyze_detects_planted_para_change() {
        let spec = two_change_spec();
        let signal = generate(&spec, 42).unwrap();
        let mut config = RunConfig::default();
        config.bands.retain(|b| b.name == "parasympathetic");
        let report = analyze_signal(&config, &signal).unwrap();
        let br = &report.bands[0];
        assert!(br.segmentation.k >= 2, "K = {}", br.segmentation.k);
        let target = 1500.0;
        let hit = br
            .segmentation
            .change_points
            .iter()
            .any(|&cp| (br.positions[cp] - target).abs() <= 30.0);
        assert!(
            hit,
            "no change point near {target}: {:?}",
            br.segmentation
                .change_points
                .iter()
                .map(|&cp| br.positions[cp])
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn run_analyze_writes_all_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let spec = two_change_spec();
        let signal = generate(&spec, 1).unwrap();
        let input = dir.path().join("signal.csv");
        fs::write(&input, signal.to_csv()).unwrap();
        let mut config = RunConfig::default();
        config.input = Some(input);
        config.format = InputFormat::Uniform;
        config.output_dir = Some(dir.path().join("out"));
        config.recording_start = Some("05:50:30".into());
        run_analyze(&config).unwrap();
        for f in [
            "coefficients_orthosympathetic.csv",
            "coefficients_parasympathetic.csv",
            "segmentation_orthosympathetic.csv",
            "segmentation_parasympathetic.csv",
            "summary.txt",
            "effective_config.toml",
        ] {
            assert!(dir.path().join("out").join(f).exists(), "{f} missing");
        }
        // effective config re-ingests identically
        let text = fs::read_to_string(dir.path().join("out/effective_config.toml")).unwrap();
        let back = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.to_toml_string(), config.to_toml_string());
    }

    #[test]
    fn empty_input_no_partial_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("empty.txt");
        fs::write(&input, "").unwrap();
        let mut config = RunConfig::default();
        config.input = Some(input);
        config.output_dir = Some(dir.path().join("out"));
        let err = run_analyze(&config).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(!dir.path().join("out").exists());
    }

    #[test]
    fn synth_then_plotdata() {
        let dir = tempfile::tempdir().unwrap();
        let spec_path = dir.path().join("spec.toml");
        fs::write(&spec_path, toml::to_string(&two_change_spec()).unwrap()).unwrap();
        let mut config = RunConfig::default();
        config.output_dir = Some(dir.path().join("synth_out"));
        config.seed = 9;
        run_synth(&config, &spec_path).unwrap();
        let truth = fs::read_to_string(dir.path().join("synth_out/truth.txt")).unwrap();
        assert_eq!(truth.trim(), "1500");

        let mut acfg = RunConfig::default();
        acfg.input = Some(dir.path().join("synth_out/signal.csv"));
        acfg.format = InputFormat::Uniform;
        acfg.output_dir = Some(dir.path().join("out"));
        run_analyze(&acfg).unwrap();
        run_plotdata(&acfg).unwrap();
        for f in [
            "parasympathetic_modulus.dat",
            "parasympathetic_changes.dat",
            "parasympathetic_segments.dat",
            "orthosympathetic_modulus.dat",
        ] {
            assert!(dir.path().join("out").join(f).exists(), "{f} missing");
        }
        // row count preserved in the modulus projection
        let coeff =
            fs::read_to_string(dir.path().join("out/coefficients_parasympathetic.csv")).unwrap();
        let dat = fs::read_to_string(dir.path().join("out/parasympathetic_modulus.dat")).unwrap();
        assert_eq!(coeff.lines().count() - 1, dat.lines().count());
    }

    #[test]
    fn determinism_across_runs() {
        let spec = two_change_spec();
        let signal = generate(&spec, 3).unwrap();
        let config = RunConfig::default();
        let a = analyze_signal(&config, &signal).unwrap();
        let b = analyze_signal(&config, &signal).unwrap();
        for (x, y) in a.bands.iter().zip(&b.bands) {
            assert_eq!(x.coefficients.coeffs, y.coefficients.coeffs);
            assert_eq!(x.segmentation.change_points, y.segmentation.change_points);
        }
    }

    #[test]
    fn selftest_passes() {
        let report = run_selftest().unwrap();
        assert!(report.contains("ok gabor-norm"));
        assert!(!report.contains("FAIL"));
    }
}
