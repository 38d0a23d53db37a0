//! Semiclassical master equation for singlet- and triplet-ground-state
//! emitters: rate-matrix assembly, steady state, photon correlations and
//! ODMR contrast.
//!
//! Rates are in MHz, so the natural time unit inside this module is the
//! microsecond. Public delay arguments are in seconds.

mod g2;
mod integrate;
mod rates;
mod steady;

pub use g2::{
    default_delays, log_delays, post_emission_state, simulate_g2, simulate_g2_from, G2Curve, G2Method, G2Options,
    InitialCondition,
};
pub use integrate::{integrate_rk4, Rk4Options};
pub use rates::{build_rate_matrix, coupling_coefficients, RateMatrix, RateParameters, StateKind, TripletManifold};
pub use steady::{metastable_population, steady_pl, steady_state, PopulationVector};

use crate::error::{invalid, Result};
use crate::spin::SpinEigensystem;
use crate::symmetry::LevelDiagram;

/// Relative PL change `(pl_b - pl_0) / pl_0`.
pub fn pl_variation(pl_b: f64, pl_0: f64) -> f64 {
    (pl_b - pl_0) / pl_0
}

/// Minimum ODMR linewidth in kHz, `Γ_ISC2 / 2π`.
pub fn odmr_linewidth_floor(params: &RateParameters) -> f64 {
    params.gamma_isc2 / (2.0 * std::f64::consts::PI) * 1e3
}

/// ODMR PL variation `(I_MR - I_0) / I_0` when triplet eigenstates `pair`
/// (1-based state labels of the master equation, e.g. `(3, 4)` for the
/// singlet-ground-state model) are mixed at rate `gamma_odmr` (MHz).
pub fn odmr_pl_variation(
    diagram: &LevelDiagram,
    params: &RateParameters,
    eig: &SpinEigensystem,
    pair: (usize, usize),
    gamma_odmr: f64,
) -> Result<f64> {
    if !(gamma_odmr >= 0.0 && gamma_odmr.is_finite()) {
        return Err(invalid(format!("ODMR rate must be finite and >= 0, got {gamma_odmr}")));
    }
    let base = build_rate_matrix(diagram, params, eig)?;
    let (i, j) = pair;
    if i == j || i == 0 || j == 0 || i > base.dim() || j > base.dim() {
        return Err(invalid(format!("invalid ODMR pair ({i}, {j})")));
    }
    let (a, b) = (i - 1, j - 1);
    let manifold = |k: usize| match base.kind(k) {
        StateKind::TripletSublevel { manifold, .. } => Some(manifold),
        _ => None,
    };
    match (manifold(a), manifold(b)) {
        (Some(ma), Some(mb)) if ma == mb => {}
        _ => return Err(invalid(format!("ODMR pair ({i}, {j}) must label sublevels of the same triplet manifold"))),
    }
    let i0 = steady_pl(&base, &steady_state(&base)?);
    let mut driven = base.clone();
    driven.add_rate(a, b, gamma_odmr)?;
    driven.add_rate(b, a, gamma_odmr)?;
    let imr = steady_pl(&driven, &steady_state(&driven)?);
    Ok(pl_variation(imr, i0))
}
