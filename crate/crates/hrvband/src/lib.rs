//! Band-localized heart-rate-variability analysis.
//!
//! The library turns an RR-interval recording into per-band wavelet
//! coefficient modulus series and segments those series into regimes of
//! homogeneous mean and variance:
//!
//! 1. [`rr`] — parse, clean, and resample RR intervals to a uniform grid.
//! 2. [`wavelet`] — Gabor and Daubechies mother wavelets fitted to the
//!    orthosympathetic (0.04–0.15 Hz) and parasympathetic (0.15–0.5 Hz)
//!    bands by scaling and modulation.
//! 3. [`transform`] — complex wavelet coefficients on a uniform grid of
//!    positions.
//! 4. [`segment`] — penalized Gaussian-likelihood change-point detection
//!    with adaptive penalty selection.
//! 5. [`synth`] — locally stationary Gaussian signal generator for
//!    validation.
//! 6. [`pipeline`] / [`config`] — end-to-end orchestration behind the
//!    `hrvband` binary.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod rr;
pub mod segment;
pub mod synth;
pub mod transform;
pub mod wavelet;

pub use config::{BandConfig, InputFormat, RunConfig};
pub use error::{Error, Result};
pub use rr::{ArtifactPolicy, RRFormat, RRSeries, UniformSeries};
pub use segment::{ClockTime, Segmentation, Segmenter};
pub use synth::PiecewiseSpec;
pub use transform::CoefficientSeries;
pub use wavelet::{BandSpec, FittedWavelet, MotherWavelet, WaveletFamily};
