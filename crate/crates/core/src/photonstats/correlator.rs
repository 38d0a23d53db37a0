use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tags::{split_channels, TimeTagRecord};
use crate::constants::PS_PER_S;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum G2Binning {
    /// Uniform bins of `width` seconds.
    Linear { width: f64 },
    /// Log-spaced bins; needs `t_min > 0`.
    Log { points_per_decade: usize },
}

/// Delay range `[t_min, t_max)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl DelayWindow {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min >= 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(invalid(format!("bad delay window [{t_min}, {t_max})")));
        }
        Ok(Self { t_min, t_max })
    }
}

/// Bin edges in seconds, `len = bins + 1`.
pub fn bin_edges(binning: &G2Binning, window: &DelayWindow) -> Result<Vec<f64>> {
    let DelayWindow { t_min, t_max } = *window;
    let edges: Vec<f64> = match *binning {
        G2Binning::Linear { width } => {
            if !(width > 0.0 && width.is_finite()) {
                return Err(invalid(format!("bin width must be > 0, got {width}")));
            }
            let n = ((t_max - t_min) / width).round().max(1.0) as usize;
            (0..=n).map(|k| t_min + k as f64 * width).collect()
        }
        G2Binning::Log { points_per_decade } => {
            if t_min <= 0.0 {
                return Err(invalid("log binning needs t_min > 0"));
            }
            if points_per_decade == 0 {
                return Err(invalid("points_per_decade must be > 0"));
            }
            let decades = (t_max / t_min).log10();
            let n = ((decades * points_per_decade as f64).ceil() as usize).max(1);
            (0..=n).map(|k| if k == n { t_max } else { t_min * 10f64.powf(decades * k as f64 / n as f64) }).collect()
        }
    };
    Ok(edges)
}

/// Coincidence histogram between the two detector channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Expected coincidences per bin for uncorrelated streams.
    pub normalization: Vec<f64>,
    pub values: Vec<f64>,
    pub poisson_sigma: Vec<f64>,
    pub log_binned: bool,
}

impl G2Histogram {
    /// Normalised histogram from raw counts. Empty bins get the one-count
    /// uncertainty `1/normalization`.
    pub fn from_counts(
        bin_edges: Vec<f64>,
        counts: Vec<u64>,
        normalization: Vec<f64>,
        log_binned: bool,
    ) -> Result<Self> {
        let n = counts.len();
        if bin_edges.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: bin_edges.len() });
        }
        if normalization.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: normalization.len() });
        }
        if bin_edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("bin edges must be strictly increasing"));
        }
        if normalization.iter().any(|&z| !(z > 0.0 && z.is_finite())) {
            return Err(invalid("normalization must be finite and > 0"));
        }
        let values: Vec<f64> = counts.iter().zip(&normalization).map(|(&c, &z)| c as f64 / z).collect();
        let poisson_sigma = counts
            .iter()
            .zip(&normalization)
            .zip(&values)
            .map(|((&c, &z), &v)| if c > 0 { v / (c as f64).sqrt() } else { 1.0 / z })
            .collect();
        Ok(Self { bin_edges, counts, normalization, values, poisson_sigma, log_binned })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Representative delay per bin: geometric centre for log bins.
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| if self.log_binned && w[0] > 0.0 { (w[0] * w[1]).sqrt() } else { 0.5 * (w[0] + w[1]) })
            .collect()
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn populated_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

fn count_pairs(starts: &[u64], stops: &[u64], edges: &[u64]) -> Vec<u64> {
    let nb = edges.len() - 1;
    let (lo_edge, hi_edge) = (edges[0], edges[nb]);
    let mut hist = vec![0u64; nb];
    let w0 = edges[1] - edges[0];
    let uniform = edges.windows(2).all(|w| w[1] - w[0] == w0).then_some(w0);
    if starts.is_empty() {
        return hist;
    }
    // first stop that could pair with the first start
    let mut lo = stops.partition_point(|&s| s + hi_edge <= starts[0]);
    for &t0 in starts {
        while lo < stops.len() && stops[lo] + hi_edge <= t0 {
            lo += 1;
        }
        let mut j = lo;
        while j < stops.len() {
            let t1 = stops[j];
            let d = t1.abs_diff(t0);
            if t1 > t0 && d >= hi_edge {
                break;
            }
            if d >= lo_edge && d < hi_edge {
                let k = match uniform {
                    Some(w) => ((d - lo_edge) / w) as usize,
                    None => edges.partition_point(|&e| e <= d) - 1,
                };
                hist[k] += 1;
            }
            j += 1;
        }
    }
    hist
}

/// Cross-correlates channel 0 with channel 1 over `|t1 − t0|` in `window`.
///
/// The expected count for two uncorrelated streams in a bin `[a, b)` is
/// `2 r0 r1 (T − (a+b)/2)(b − a)`, where `T` is the record span; the factor
/// 2 covers both signs of the delay.
pub fn compute_g2(tags: &[TimeTagRecord], binning: &G2Binning, window: &DelayWindow) -> Result<G2Histogram> {
    let (ch0, ch1) = split_channels(tags)?;
    compute_g2_channels(&ch0, &ch1, binning, window)
}

pub fn compute_g2_channels(ch0: &[u64], ch1: &[u64], binning: &G2Binning, window: &DelayWindow) -> Result<G2Histogram> {
    for (c, ts) in [(0, ch0), (1, ch1)] {
        if ts.len() < 2 {
            return Err(invalid(format!("channel {c} has {} tags; at least 2 required", ts.len())));
        }
        if ts.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid(format!("timestamps on channel {c} are not sorted")));
        }
    }
    if ch0 == ch1 {
        return Err(invalid("both channels carry the identical stream; a detector pair is required"));
    }
    let first = ch0[0].min(ch1[0]);
    let last = ch0[ch0.len() - 1].max(ch1[ch1.len() - 1]);
    let span = (last - first) as f64 / PS_PER_S;
    if window.t_max >= span {
        return Err(invalid(format!("window end {} s exceeds the record span {span} s", window.t_max)));
    }

    let edges_s = bin_edges(binning, window)?;
    let edges_ps: Vec<u64> = edges_s.iter().map(|&e| (e * PS_PER_S).round() as u64).collect();
    if edges_ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("bins narrower than the 1 ps tag resolution"));
    }

    let chunk = (ch0.len() / (4 * rayon::current_num_threads())).max(1 << 14);
    let counts = ch0.par_chunks(chunk).map(|starts| count_pairs(starts, ch1, &edges_ps)).reduce(
        || vec![0u64; edges_ps.len() - 1],
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );

    // integer edges are what was actually counted
    let edges: Vec<f64> = edges_ps.iter().map(|&e| e as f64 / PS_PER_S).collect();
    let r0 = ch0.len() as f64 / span;
    let r1 = ch1.len() as f64 / span;
    let normalization =
        edges.windows(2).map(|w| 2.0 * r0 * r1 * (span - 0.5 * (w[0] + w[1])) * (w[1] - w[0])).collect();
    G2Histogram::from_counts(edges, counts, normalization, matches!(binning, G2Binning::Log { .. }))
}
