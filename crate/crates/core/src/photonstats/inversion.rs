use serde::{Deserialize, Serialize};

use crate::constants::per_second_to_mhz;
use crate::error::{invalid, Result};

/// Rates recovered from the zero-field three-level analysis, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeLevelRates {
    #[serde(rename = "gamma_s_MHz")]
    pub gamma_s: f64,
    #[serde(rename = "gamma_isc1_MHz")]
    pub gamma_isc1: f64,
    #[serde(rename = "gamma_isc2_MHz")]
    pub gamma_isc2: f64,
}

/// Closed-form rates from `τ1`, `τ2` (seconds), the bunching amplitude `C2`
/// and the saturation parameter `x = Γe/Γs`:
///
/// `Γs = 1/(τ1(1+x))`, `Γ_ISC2 = 1/(τ2(1+C2))`, `Γ_ISC1 = ((1+x)/x)(1/τ2 − Γ_ISC2)`.
pub fn estimate_rates_three_level(tau1: f64, tau2: f64, c2: f64, x: f64) -> Result<ThreeLevelRates> {
    for (name, v) in [("tau1", tau1), ("tau2", tau2), ("x", x)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
        }
    }
    if !(c2 >= 0.0 && c2.is_finite()) {
        return Err(invalid(format!("c2 must be finite and >= 0, got {c2}")));
    }
    let gamma_s = 1.0 / (tau1 * (1.0 + x));
    let gamma_isc2 = 1.0 / (tau2 * (1.0 + c2));
    let gamma_isc1 = (1.0 + x) / x * (1.0 / tau2 - gamma_isc2);
    Ok(ThreeLevelRates {
        gamma_s: per_second_to_mhz(gamma_s),
        gamma_isc1: per_second_to_mhz(gamma_isc1),
        gamma_isc2: per_second_to_mhz(gamma_isc2),
    })
}
