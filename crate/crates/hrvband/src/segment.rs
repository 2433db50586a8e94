//! Variance segmentation of a modulus series.
//!
//! A series is split into K contiguous segments by minimizing the
//! Gaussian log-likelihood contrast
//!
//! `sum_k n_k ln(sigma_k^2) + n_k`
//!
//! over all admissible partitions via dynamic programming, for every
//! K up to a cap. The number of segments is then chosen from the
//! penalized criterion `J_K + beta K` by scanning the lower convex
//! hull of (K, J_K): the K whose optimality interval in beta is
//! widest is the stable choice, and a series with no interval clearly
//! wider than noise falls back to K = 1.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::fmt;

/// Time-of-day in whole seconds since midnight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockTime(pub u32);

impl ClockTime {
    pub fn from_hms(h: u32, m: u32, s: u32) -> ClockTime {
        ClockTime((h * 3600 + m * 60 + s) % 86_400)
    }

    /// Parse `"HH:MM:SS"`.
    pub fn parse(text: &str) -> Result<ClockTime> {
        let parts: Vec<&str> = text.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::config(format!("bad clock time {text:?}")));
        }
        let mut nums = [0u32; 3];
        for (i, p) in parts.iter().enumerate() {
            nums[i] = p
                .parse()
                .map_err(|_| Error::config(format!("bad clock time {text:?}")))?;
        }
        if nums[0] > 23 || nums[1] > 59 || nums[2] > 59 {
            return Err(Error::config(format!("clock time out of range {text:?}")));
        }
        Ok(ClockTime::from_hms(nums[0], nums[1], nums[2]))
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0 % 86_400;
        write!(f, "{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
    }
}

/// Clock time at sample `index` of a series whose first sample is at
/// `start` and whose samples are `step` seconds apart. Wraps past
/// midnight.
pub fn index_to_clock(start: ClockTime, index: usize, step: f64) -> ClockTime {
    let offset = (index as f64 * step).round() as u64;
    ClockTime(((start.0 as u64 + offset) % 86_400) as u32)
}

/// One vertex of the lower convex hull of (K, J_K), with the interval
/// of penalties beta for which this K minimizes J_K + beta K.
#[derive(Debug, Clone, Copy)]
pub struct HullVertex {
    pub k: usize,
    pub cost: f64,
    pub beta_lo: f64,
    /// `f64::INFINITY` for the K = 1 vertex.
    pub beta_hi: f64,
}

/// Normalized optimal costs J_K for K = 1..=k_max together with the
/// hull used for penalty selection.
#[derive(Debug, Clone)]
pub struct PenaltyPath {
    /// J_K (total contrast divided by the series length), index 0 is K = 1.
    pub costs: Vec<f64>,
    /// Optimal change points for each K, same indexing as `costs`.
    pub change_points: Vec<Vec<usize>>,
    pub hull: Vec<HullVertex>,
}

impl PenaltyPath {
    pub fn k_max(&self) -> usize {
        self.costs.len()
    }

    /// Threshold penalty below which some K > 1 is preferred to K = 1.
    pub fn beta_one(&self) -> f64 {
        self.hull
            .iter()
            .find(|v| v.k == 1)
            .map(|v| v.beta_lo)
            .unwrap_or(0.0)
    }
}

/// Result of segmenting one series.
#[derive(Debug, Clone)]
pub struct Segmentation {
    /// Indices where a new segment starts; excludes 0 and n. Empty for K = 1.
    pub change_points: Vec<usize>,
    pub k: usize,
    /// Per-segment sample means of the input data.
    pub segment_means: Vec<f64>,
    /// Per-segment (biased) sample variances of the input data.
    pub segment_vars: Vec<f64>,
    /// Beta interval that selected this K (0, beta_one) when K = 1.
    pub beta_interval: (f64, f64),
    pub path: PenaltyPath,
}

/// Segmentation settings.
#[derive(Debug, Clone)]
pub struct Segmenter {
    pub min_segment_length: usize,
    pub k_max: usize,
    /// Fraction of the K = 1 threshold penalty that the widest interval
    /// must reach for a K > 1 segmentation to be accepted.
    pub stability_fraction: f64,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter {
            min_segment_length: 10,
            k_max: 20,
            stability_fraction: 0.5,
        }
    }
}

/// Prefix sums of a centered copy of the data, for O(1) segment
/// contrast queries.
struct Prefix {
    s1: Vec<f64>,
    s2: Vec<f64>,
    var_floor: f64,
}

impl Prefix {
    fn new(data: &[f64]) -> Prefix {
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let mut s1 = Vec::with_capacity(data.len() + 1);
        let mut s2 = Vec::with_capacity(data.len() + 1);
        s1.push(0.0);
        s2.push(0.0);
        let (mut a, mut b) = (0.0f64, 0.0f64);
        for &x in data {
            let c = x - mean;
            a += c;
            b += c * c;
            s1.push(a);
            s2.push(b);
        }
        let global_var = (b / n).max(0.0);
        let var_floor = if global_var > 0.0 {
            1e-12 * global_var
        } else {
            1.0
        };
        Prefix { s1, s2, var_floor }
    }

    /// Within-segment variance of data[lo..hi] (invariant to the global
    /// centering), clamped to the floor.
    fn variance(&self, lo: usize, hi: usize) -> f64 {
        let nk = (hi - lo) as f64;
        let sum = self.s1[hi] - self.s1[lo];
        let ss = self.s2[hi] - self.s2[lo];
        ((ss - sum * sum / nk) / nk).max(self.var_floor)
    }

    /// `n_k ln(sigma^2) + n_k` for data[lo..hi].
    fn contrast(&self, lo: usize, hi: usize) -> f64 {
        let nk = (hi - lo) as f64;
        nk * self.variance(lo, hi).ln() + nk
    }
}

impl Segmenter {
    fn validate(&self, n: usize) -> Result<()> {
        if self.min_segment_length < 2 {
            return Err(Error::config("min_segment_length must be >= 2"));
        }
        if self.k_max < 1 {
            return Err(Error::config("k_max must be >= 1"));
        }
        if !(self.stability_fraction >= 0.0 && self.stability_fraction <= 1.0) {
            return Err(Error::config(format!(
                "stability_fraction must lie in [0, 1], got {}",
                self.stability_fraction
            )));
        }
        if n < self.min_segment_length {
            return Err(Error::input(format!(
                "series of length {n} is shorter than min_segment_length {}",
                self.min_segment_length
            )));
        }
        Ok(())
    }

    /// Optimal partitions and normalized costs J_K for every feasible
    /// K up to `k_max`.
    // index loops mirror the DP recurrence; iterator forms obscure it
    #[allow(clippy::needless_range_loop)]
    pub fn penalty_path(&self, data: &[f64]) -> Result<PenaltyPath> {
        self.validate(data.len())?;
        let n = data.len();
        let lmin = self.min_segment_length;
        let k_cap = self.k_max.min(n / lmin).max(1);
        let prefix = Prefix::new(data);

        // best[k-1][i] = minimal contrast of splitting data[..i] into k
        // segments of length >= lmin; back[k-1][i] = start of the last one.
        let mut best: Vec<Vec<f64>> = Vec::with_capacity(k_cap);
        let mut back: Vec<Vec<u32>> = Vec::with_capacity(k_cap);

        let mut layer1 = vec![f64::INFINITY; n + 1];
        for (i, slot) in layer1.iter_mut().enumerate().take(n + 1).skip(lmin) {
            *slot = prefix.contrast(0, i);
        }
        best.push(layer1);
        back.push(vec![0u32; n + 1]);

        for k in 2..=k_cap {
            let prev = &best[k - 2];
            let row: Vec<(f64, u32)> = (0..=n)
                .into_par_iter()
                .map(|i| {
                    if i < k * lmin {
                        return (f64::INFINITY, 0u32);
                    }
                    let mut bc = f64::INFINITY;
                    let mut bj = 0u32;
                    for j in ((k - 1) * lmin)..=(i - lmin) {
                        let c = prev[j];
                        if !c.is_finite() {
                            continue;
                        }
                        let total = c + prefix.contrast(j, i);
                        if total < bc {
                            bc = total;
                            bj = j as u32;
                        }
                    }
                    (bc, bj)
                })
                .collect();
            best.push(row.iter().map(|r| r.0).collect());
            back.push(row.iter().map(|r| r.1).collect());
        }

        let mut costs = Vec::with_capacity(k_cap);
        let mut change_points = Vec::with_capacity(k_cap);
        for k in 1..=k_cap {
            let total = best[k - 1][n];
            if !total.is_finite() {
                break;
            }
            costs.push(total / n as f64);
            let mut cps = Vec::with_capacity(k - 1);
            let mut i = n;
            for kk in (2..=k).rev() {
                let j = back[kk - 1][i] as usize;
                cps.push(j);
                i = j;
            }
            cps.reverse();
            change_points.push(cps);
        }

        let hull = lower_hull(&costs);
        Ok(PenaltyPath {
            costs,
            change_points,
            hull,
        })
    }

    /// Full pipeline: DP, penalty scan, and segment statistics.
    pub fn select_segmentation(&self, data: &[f64]) -> Result<Segmentation> {
        let path = self.penalty_path(data)?;
        let beta_one = path.beta_one();

        // Candidates: hull vertices with K >= 2, excluding the terminal
        // vertex whose interval is open at zero and therefore always the
        // widest on featureless data.
        let mut chosen: Option<&HullVertex> = None;
        if path.hull.len() > 2 {
            for v in &path.hull[1..path.hull.len() - 1] {
                let width = v.beta_hi - v.beta_lo;
                let better = match chosen {
                    None => true,
                    Some(c) => {
                        let cw = c.beta_hi - c.beta_lo;
                        width > cw + 1e-15 || ((width - cw).abs() <= 1e-15 && v.k < c.k)
                    }
                };
                if better {
                    chosen = Some(v);
                }
            }
        }

        let (k, beta_interval) = match chosen {
            Some(v) if v.beta_hi - v.beta_lo >= self.stability_fraction * beta_one => {
                (v.k, (v.beta_lo, v.beta_hi))
            }
            _ => (1, (beta_one, f64::INFINITY)),
        };

        let change_points = path.change_points[k - 1].clone();
        let mut bounds = Vec::with_capacity(k + 1);
        bounds.push(0);
        bounds.extend_from_slice(&change_points);
        bounds.push(data.len());
        let mut segment_means = Vec::with_capacity(k);
        let mut segment_vars = Vec::with_capacity(k);
        for w in bounds.windows(2) {
            let seg = &data[w[0]..w[1]];
            let nk = seg.len() as f64;
            let mean = seg.iter().sum::<f64>() / nk;
            let var = seg.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / nk;
            segment_means.push(mean);
            segment_vars.push(var);
        }

        Ok(Segmentation {
            change_points,
            k,
            segment_means,
            segment_vars,
            beta_interval,
            path,
        })
    }
}

/// Lower convex hull of (K, J_K) with the beta interval of each vertex.
fn lower_hull(costs: &[f64]) -> Vec<HullVertex> {
    let pts: Vec<(f64, f64)> = costs
        .iter()
        .enumerate()
        .map(|(i, &c)| ((i + 1) as f64, c))
        .collect();
    let mut stack: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while stack.len() >= 2 {
            let a = pts[stack[stack.len() - 2]];
            let b = pts[stack[stack.len() - 1]];
            let c = pts[i];
            // pop b if it lies on or above chord a-c
            let cross = (b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1);
            if cross <= 0.0 {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(i);
    }

    let mut hull = Vec::with_capacity(stack.len());
    for (pos, &idx) in stack.iter().enumerate() {
        let beta_hi = if pos == 0 {
            f64::INFINITY
        } else {
            let p = pts[stack[pos - 1]];
            let q = pts[idx];
            (p.1 - q.1) / (q.0 - p.0)
        };
        let beta_lo = if pos + 1 == stack.len() {
            0.0
        } else {
            let q = pts[idx];
            let r = pts[stack[pos + 1]];
            (q.1 - r.1) / (r.0 - q.0)
        };
        hull.push(HullVertex {
            k: idx + 1,
            cost: pts[idx].1,
            beta_lo: beta_lo.max(0.0),
            beta_hi,
        });
    }
    hull
}
