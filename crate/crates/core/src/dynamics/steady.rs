use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::rates::RateMatrix;
use crate::error::{Error, Result};

/// Occupation probabilities of the master-equation states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationVector(pub Vec<f64>);

impl PopulationVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for PopulationVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Null-space vector of `R`, normalised to unit total population.
///
/// One balance row (the one with the largest diagonal) is swapped for the
/// normalisation row and the square system is solved directly.
pub fn steady_state(r: &RateMatrix) -> Result<PopulationVector> {
    let m = r.matrix();
    let n = m.nrows();
    let scale = m.amax();
    if scale == 0.0 {
        return Err(Error::RankDeficient("rate matrix is identically zero".into()));
    }

    // A second (near-)null direction means several disconnected steady states.
    let sv = m.clone().singular_values();
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    if n > 1 && sorted[1] <= 1e-12 * scale * n as f64 {
        return Err(Error::RankDeficient(format!(
            "null space of dimension > 1 (second singular value {:.3e})",
            sorted[1]
        )));
    }

    let pivot = (0..n).max_by(|&a, &b| m[(a, a)].abs().total_cmp(&m[(b, b)].abs())).unwrap_or(0);
    let mut a: DMatrix<f64> = m.clone();
    a.row_mut(pivot).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[pivot] = 1.0;
    let x = a.lu().solve(&rhs).ok_or_else(|| Error::RankDeficient("normalised balance system is singular".into()))?;

    let residual = (m * &x).amax();
    if !residual.is_finite() || residual > 1e-10 * scale.max(1.0) {
        return Err(Error::RankDeficient(format!("steady-state residual {residual:.3e}")));
    }
    // Rounding can leave values like -1e-18 on nearly empty states.
    let v: Vec<f64> = x.iter().map(|&p| if p < 0.0 && p > -1e-12 { 0.0 } else { p }).collect();
    if v.iter().any(|&p| p < -1e-12) {
        return Err(Error::RankDeficient("steady state has negative populations".into()));
    }
    Ok(PopulationVector(v))
}

/// Photon emission rate (MHz): radiative flux `Σ R_ij x_j` over GS←ES edges.
pub fn steady_pl(r: &RateMatrix, x: &PopulationVector) -> f64 {
    r.emission_rate(&x.to_dvector())
}

/// Total population parked in metastable states.
pub fn metastable_population(r: &RateMatrix, x: &PopulationVector) -> f64 {
    r.metastable_indices().iter().map(|&k| x[k]).sum()
}
