use serde::{Deserialize, Serialize};

use super::correlator::G2Histogram;
use crate::error::{invalid, Result};

/// Signal fraction `ρ = I / (I + I_bkgd)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct BackgroundRatio(f64);

impl BackgroundRatio {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
        }
        Ok(Self(rho))
    }

    /// `ρ = √(C/C̃)` from a raw and corrected amplitude pair.
    pub fn from_amplitudes(raw: f64, corrected: f64) -> Result<Self> {
        if !(raw > 0.0 && corrected > 0.0) {
            return Err(invalid("amplitudes must be > 0"));
        }
        Self::new((raw / corrected).sqrt())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for BackgroundRatio {
    type Error = crate::error::Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BackgroundRatio> for f64 {
    fn from(r: BackgroundRatio) -> f64 {
        r.0
    }
}

/// `C̃_i = C_i / ρ²`.
pub fn background_correct_amplitudes(c: &[f64], rho: BackgroundRatio) -> Vec<f64> {
    let r2 = rho.0 * rho.0;
    c.iter().map(|&ci| ci / r2).collect()
}

/// `g̃ = (g − (1 − ρ²)) / ρ²`.
pub fn correct_value(g: f64, rho: BackgroundRatio) -> f64 {
    let r2 = rho.0 * rho.0;
    (g - (1.0 - r2)) / r2
}

/// Inverse of [`correct_value`]: `g = ρ² g̃ + 1 − ρ²`.
pub fn uncorrect_value(g_tilde: f64, rho: BackgroundRatio) -> f64 {
    let r2 = rho.0 * rho.0;
    r2 * g_tilde + (1.0 - r2)
}

/// Applies the correction bin by bin; uncertainties scale by `1/ρ²`.
/// Counts and normalisation are left untouched.
pub fn background_correct_curve(hist: &G2Histogram, rho: BackgroundRatio) -> G2Histogram {
    let r2 = rho.0 * rho.0;
    let mut out = hist.clone();
    out.values = hist.values.iter().map(|&g| correct_value(g, rho)).collect();
    out.poisson_sigma = hist.poisson_sigma.iter().map(|&s| s / r2).collect();
    out
}

pub fn background_uncorrect_curve(hist: &G2Histogram, rho: BackgroundRatio) -> G2Histogram {
    let r2 = rho.0 * rho.0;
    let mut out = hist.clone();
    out.values = hist.values.iter().map(|&g| uncorrect_value(g, rho)).collect();
    out.poisson_sigma = hist.poisson_sigma.iter().map(|&s| s * r2).collect();
    out
}
