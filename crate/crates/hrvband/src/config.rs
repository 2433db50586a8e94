//! Run configuration: defaults, TOML round-trip, validation.

use crate::error::{Error, Result};
use crate::rr::{ArtifactPolicy, RRFormat};
use crate::segment::{ClockTime, Segmenter};
use crate::wavelet::{BandSpec, WaveletFamily};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// Cumulative R-peak times, one per line, seconds.
    PeakTimes,
    /// RR intervals, one per line, seconds.
    Intervals,
    /// Already-uniform `t,rr` CSV; artifact cleaning and resampling are skipped.
    Uniform,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandConfig {
    pub name: String,
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl BandConfig {
    pub fn to_band(&self) -> BandSpec {
        BandSpec {
            name: self.name.clone(),
            lo_hz: self.lo_hz,
            hi_hz: self.hi_hz,
        }
    }
}

fn default_bands() -> Vec<BandConfig> {
    vec![
        BandConfig {
            name: "orthosympathetic".into(),
            lo_hz: 0.04,
            hi_hz: 0.15,
        },
        BandConfig {
            name: "parasympathetic".into(),
            lo_hz: 0.15,
            hi_hz: 0.5,
        },
    ]
}

fn d_format() -> InputFormat {
    InputFormat::PeakTimes
}
fn d_family() -> WaveletFamily {
    WaveletFamily::Gabor
}
fn d_order() -> usize {
    6
}
fn d_cascade() -> usize {
    10
}
fn d_delta() -> f64 {
    0.25
}
fn d_b_step() -> f64 {
    1.0
}
fn d_half_width() -> f64 {
    3.5
}
fn d_k_max() -> usize {
    20
}
fn d_min_seg() -> usize {
    10
}
fn d_stability() -> f64 {
    0.5
}
fn d_policy() -> ArtifactPolicy {
    ArtifactPolicy::Linear
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default = "d_format")]
    pub format: InputFormat,
    #[serde(default = "default_bands")]
    pub bands: Vec<BandConfig>,
    #[serde(default = "d_family")]
    pub family: WaveletFamily,
    /// Daubechies vanishing moments, used when family = daubechies.
    #[serde(default = "d_order")]
    pub daubechies_order: usize,
    /// Dyadic cascade resolution exponent J.
    #[serde(default = "d_cascade")]
    pub cascade_level: usize,
    /// Resampling step Δ in seconds.
    #[serde(default = "d_delta")]
    pub delta: f64,
    /// Coefficient grid step in seconds.
    #[serde(default = "d_b_step")]
    pub b_step: f64,
    /// Gabor pseudo-support half width L.
    #[serde(default = "d_half_width")]
    pub gabor_half_width: f64,
    #[serde(default = "d_k_max")]
    pub k_max: usize,
    #[serde(default = "d_min_seg")]
    pub min_segment_length: usize,
    #[serde(default = "d_stability")]
    pub stability_fraction: f64,
    #[serde(default = "d_policy")]
    pub artifact_policy: ArtifactPolicy,
    /// Clock time of the first sample, "HH:MM:SS".
    #[serde(default)]
    pub recording_start: Option<String>,
    /// Emit edge-affected coefficient positions too (flagged in the mask).
    #[serde(default)]
    pub include_edges: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Generator seed for the synth subcommand.
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config must deserialize from defaults")
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    // negated comparisons are deliberate: they reject NaN too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::config(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if !(self.b_step > 0.0) {
            return Err(Error::config(format!(
                "b_step must be > 0, got {}",
                self.b_step
            )));
        }
        if !(self.gabor_half_width > 0.0) {
            return Err(Error::config(format!(
                "gabor_half_width must be > 0, got {}",
                self.gabor_half_width
            )));
        }
        if self.bands.is_empty() {
            return Err(Error::config("bands must not be empty"));
        }
        for b in &self.bands {
            if !(b.lo_hz >= 0.0 && b.hi_hz > b.lo_hz) {
                return Err(Error::config(format!(
                    "band {:?}: need 0 <= lo_hz < hi_hz, got ({}, {})",
                    b.name, b.lo_hz, b.hi_hz
                )));
            }
            if self.delta > 0.5 / b.hi_hz {
                return Err(Error::config(format!(
                    "delta {} too coarse for band {:?} (hi {} Hz needs delta <= {})",
                    self.delta,
                    b.name,
                    b.hi_hz,
                    0.5 / b.hi_hz
                )));
            }
        }
        // overlap check on sorted bands: interiors must be disjoint
        let mut sorted: Vec<&BandConfig> = self.bands.iter().collect();
        sorted.sort_by(|a, b| a.lo_hz.partial_cmp(&b.lo_hz).unwrap());
        for w in sorted.windows(2) {
            if w[1].lo_hz < w[0].hi_hz - 1e-12 {
                return Err(Error::config(format!(
                    "bands {:?} and {:?} overlap",
                    w[0].name, w[1].name
                )));
            }
        }
        if !(2..=10).contains(&self.daubechies_order) {
            return Err(Error::config(format!(
                "daubechies_order must be in 2..=10, got {}",
                self.daubechies_order
            )));
        }
        if !(6..=16).contains(&self.cascade_level) {
            return Err(Error::config(format!(
                "cascade_level must be in 6..=16, got {}",
                self.cascade_level
            )));
        }
        if self.min_segment_length < 2 {
            return Err(Error::config("min_segment_length must be >= 2"));
        }
        if self.k_max < 1 {
            return Err(Error::config("k_max must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.stability_fraction) {
            return Err(Error::config(format!(
                "stability_fraction must lie in [0, 1], got {}",
                self.stability_fraction
            )));
        }
        if let Some(rs) = &self.recording_start {
            ClockTime::parse(rs)?;
        }
        Ok(())
    }

    pub fn rr_format(&self) -> Option<RRFormat> {
        match self.format {
            InputFormat::PeakTimes => Some(RRFormat::PeakTimes),
            InputFormat::Intervals => Some(RRFormat::Intervals),
            InputFormat::Uniform => None,
        }
    }

    pub fn segmenter(&self) -> Segmenter {
        Segmenter {
            min_segment_length: self.min_segment_length,
            k_max: self.k_max,
            stability_fraction: self.stability_fraction,
        }
    }

    pub fn recording_start_clock(&self) -> Result<Option<ClockTime>> {
        self.recording_start
            .as_deref()
            .map(ClockTime::parse)
            .transpose()
    }
}
