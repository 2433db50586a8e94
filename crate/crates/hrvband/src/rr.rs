//! Ingestion of RR-interval recordings: parsing, artifact handling and
//! resampling onto a uniform grid.
//!
//! The raw signal is the sequence of inter-beat intervals in seconds,
//! attached to the beat times. Between beats the RR value is constant by
//! definition, so the continuous-time signal is realized as a
//! previous-beat piecewise-constant hold.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::io::BufRead;

/// Physiological lower bound on an RR interval: 250 bpm.
pub const RR_MIN_S: f64 = 60.0 / 250.0;
/// Physiological upper bound on an RR interval: 20 bpm.
pub const RR_MAX_S: f64 = 60.0 / 20.0;

/// Input layout of an RR recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RRFormat {
    /// One beat time per line, seconds since recording start, strictly
    /// increasing, millisecond precision or better.
    PeakTimes,
    /// One interval per line, seconds. Beat times are synthesized
    /// cumulatively starting at zero.
    Intervals,
}

/// Artifact replacement policy for intervals outside the physiological
/// range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactPolicy {
    /// Copy the last valid interval forward.
    HoldPrevious,
    /// Linear interpolation between the neighboring valid intervals.
    Linear,
    /// Refuse to continue if any artifact is present.
    Reject,
}

/// Irregular event-time series of inter-beat intervals.
#[derive(Debug, Clone)]
pub struct RRSeries {
    /// Beat times in seconds since recording start, strictly increasing.
    pub peak_times: Vec<f64>,
    /// intervals[i] = peak_times[i+1] - peak_times[i], seconds.
    pub intervals: Vec<f64>,
    /// true where intervals[i] is outside [RR_MIN_S, RR_MAX_S].
    pub artifact_mask: Vec<bool>,
}

/// Real-valued samples on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    pub start_time: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

fn plausible(rr: f64) -> bool {
    (RR_MIN_S..=RR_MAX_S).contains(&rr)
}

impl RRSeries {
    fn from_peak_times(peak_times: Vec<f64>) -> Result<Self> {
        if peak_times.len() < 2 {
            return Err(Error::input(
                "need at least two beat times to form one interval",
            ));
        }
        let intervals: Vec<f64> = peak_times.windows(2).map(|w| w[1] - w[0]).collect();
        let artifact_mask = intervals.iter().map(|&rr| !plausible(rr)).collect();
        Ok(RRSeries {
            peak_times,
            intervals,
            artifact_mask,
        })
    }

    fn from_intervals(intervals: Vec<f64>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::input("no intervals in input"));
        }
        let mut peak_times = Vec::with_capacity(intervals.len() + 1);
        let mut t = 0.0;
        peak_times.push(t);
        for &rr in &intervals {
            t += rr;
            peak_times.push(t);
        }
        let artifact_mask = intervals.iter().map(|&rr| !plausible(rr)).collect();
        Ok(RRSeries {
            peak_times,
            intervals,
            artifact_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn has_artifacts(&self) -> bool {
        self.artifact_mask.iter().any(|&m| m)
    }

    /// Total recorded span in seconds.
    pub fn duration(&self) -> f64 {
        self.peak_times[self.peak_times.len() - 1] - self.peak_times[0]
    }
}

/// Parse an RR recording from a text stream.
///
/// Lines starting with `#` and blank lines are skipped. Errors name the
/// offending one-based line number.
pub fn parse_rr(input: impl BufRead, format: RRFormat) -> Result<RRSeries> {
    let mut values = Vec::new();
    let mut prev: Option<(f64, usize)> = None;
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::input(format!("read failure at line {lineno}: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let v: f64 = trimmed
            .parse()
            .map_err(|_| Error::input(format!("unparseable value {trimmed:?} at line {lineno}")))?;
        if !v.is_finite() {
            return Err(Error::input(format!(
                "non-finite value {trimmed:?} at line {lineno}"
            )));
        }
        match format {
            RRFormat::PeakTimes => {
                if let Some((p, pline)) = prev {
                    if v <= p {
                        return Err(Error::input(format!(
                            "peak times not strictly increasing: {v} at line {lineno} \
                             does not exceed {p} at line {pline}"
                        )));
                    }
                }
                prev = Some((v, lineno));
            }
            RRFormat::Intervals => {
                if v <= 0.0 {
                    return Err(Error::input(format!(
                        "non-positive interval {v} at line {lineno}"
                    )));
                }
            }
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::input("empty input"));
    }
    match format {
        RRFormat::PeakTimes => RRSeries::from_peak_times(values),
        RRFormat::Intervals => RRSeries::from_intervals(values),
    }
}

/// Replace artifact intervals according to `policy`.
///
/// Beat times are kept: only the interval values are replaced, so the
/// time anchoring of the recording is preserved. The returned mask is
/// all-false.
pub fn clean_artifacts(series: &RRSeries, policy: ArtifactPolicy) -> Result<RRSeries> {
    if !series.has_artifacts() {
        return Ok(RRSeries {
            peak_times: series.peak_times.clone(),
            intervals: series.intervals.clone(),
            artifact_mask: vec![false; series.len()],
        });
    }
    let n = series.len();
    let mask = &series.artifact_mask;
    let mut intervals = series.intervals.clone();
    match policy {
        ArtifactPolicy::Reject => {
            let bad: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
            return Err(Error::input(format!(
                "artifact intervals present at indices {bad:?} (reject policy)"
            )));
        }
        ArtifactPolicy::HoldPrevious => {
            if mask[0] {
                return Err(Error::input(
                    "leading interval is an artifact: no previous value to hold",
                ));
            }
            for i in 1..n {
                if mask[i] {
                    intervals[i] = intervals[i - 1];
                }
            }
        }
        ArtifactPolicy::Linear => {
            if mask.iter().all(|&m| m) {
                return Err(Error::input("every interval is an artifact"));
            }
            let mut i = 0;
            while i < n {
                if !mask[i] {
                    i += 1;
                    continue;
                }
                let run_start = i;
                let mut run_end = i;
                while run_end + 1 < n && mask[run_end + 1] {
                    run_end += 1;
                }
                let left = if run_start > 0 {
                    Some(intervals[run_start - 1])
                } else {
                    None
                };
                let right = if run_end + 1 < n {
                    Some(intervals[run_end + 1])
                } else {
                    None
                };
                let m = run_end - run_start + 1;
                match (left, right) {
                    (Some(a), Some(b)) => {
                        for (j, slot) in intervals[run_start..=run_end].iter_mut().enumerate() {
                            let f = (j + 1) as f64 / (m + 1) as f64;
                            *slot = a + f * (b - a);
                        }
                    }
                    // no neighbor on one side: hold the available one
                    (Some(a), None) => intervals[run_start..=run_end].fill(a),
                    (None, Some(b)) => intervals[run_start..=run_end].fill(b),
                    (None, None) => unreachable!("all-artifact case handled above"),
                }
                i = run_end + 1;
            }
        }
    }
    Ok(RRSeries {
        peak_times: series.peak_times.clone(),
        intervals,
        artifact_mask: vec![false; n],
    })
}

/// Evaluate the piecewise-constant hold signal at time `t`.
///
/// X(t) = intervals[i] for t in [peak_times[i], peak_times[i+1]); the
/// value at and beyond the last beat time clamps to the last interval.
pub fn hold_value_at(series: &RRSeries, t: f64) -> f64 {
    let pts = &series.peak_times;
    // index of the interval in force at t
    let idx = pts.partition_point(|&p| p <= t);
    let i = idx.saturating_sub(1).min(series.intervals.len() - 1);
    series.intervals[i]
}

/// Sample the previous-beat hold signal on a uniform grid covering
/// [first peak time, last peak time].
pub fn resample(series: &RRSeries, step: f64) -> Result<UniformSeries> {
    if step <= 0.0 {
        return Err(Error::config(format!(
            "resampling step must be > 0, got {step}"
        )));
    }
    if series.has_artifacts() {
        return Err(Error::input(
            "series still contains artifacts; clean before resampling",
        ));
    }
    let start = series.peak_times[0];
    let span = series.duration();
    if span < step {
        return Err(Error::input(format!(
            "recording ({span:.3} s) shorter than one resampling step ({step} s)"
        )));
    }
    // +eps so an endpoint landing exactly on the grid is kept
    let count = (span / step + 1e-9).floor() as usize + 1;
    let values = (0..count)
        .map(|k| hold_value_at(series, start + k as f64 * step))
        .collect();
    Ok(UniformSeries {
        start_time: start,
        step,
        values,
    })
}

impl UniformSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + (self.values.len().saturating_sub(1)) as f64 * self.step
    }

    /// CSV with header `t,rr`; t to ms, values to microseconds.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 16 + 8);
        out.push_str("t,rr\n");
        for (k, v) in self.values.iter().enumerate() {
            let t = self.start_time + k as f64 * self.step;
            let _ = writeln!(out, "{t:.3},{v:.6}");
        }
        out
    }

    /// Parse the `t,rr` CSV produced by [`UniformSeries::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut start_time = None;
        let mut second_time = None;
        let mut values = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if idx == 0 && trimmed.starts_with("t,") {
                continue;
            }
            let (ts, vs) = trimmed
                .split_once(',')
                .ok_or_else(|| Error::input(format!("expected t,value at line {lineno}")))?;
            let t: f64 = ts
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad time {ts:?} at line {lineno}")))?;
            let v: f64 = vs
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("bad value {vs:?} at line {lineno}")))?;
            if start_time.is_none() {
                start_time = Some(t);
            } else if second_time.is_none() {
                second_time = Some(t);
            }
            values.push(v);
        }
        let start_time = start_time.ok_or_else(|| Error::input("empty uniform series"))?;
        if values.len() < 2 {
            return Err(Error::input("uniform series needs at least two samples"));
        }
        let step = second_time.unwrap() - start_time;
        if step <= 0.0 {
            return Err(Error::input("uniform series times not increasing"));
        }
        Ok(UniformSeries {
            start_time,
            step,
            values,
        })
    }
}
