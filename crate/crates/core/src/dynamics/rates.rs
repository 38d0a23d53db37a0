use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spin::SpinEigensystem;
use crate::symmetry::{GroundSpin, LevelDiagram, SelectionVector};

/// Transition rates driving the optical dynamics.
///
/// Rates are in MHz, `t1` in µs. `epsilon` relaxes sharp ISC selectivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateParameters {
    pub gamma_e: f64,
    pub gamma_s: f64,
    pub gamma_isc1: f64,
    pub gamma_isc2: f64,
    pub t1: f64,
    pub epsilon: f64,
}

impl RateParameters {
    pub fn new(gamma_e: f64, gamma_s: f64, gamma_isc1: f64, gamma_isc2: f64, t1: f64, epsilon: f64) -> Result<Self> {
        let p = Self { gamma_e, gamma_s, gamma_isc1, gamma_isc2, t1, epsilon };
        p.validate()?;
        Ok(p)
    }

    /// Builds the parameters from the saturation ratio `x = Γe/Γs`.
    pub fn with_saturation(
        x: f64,
        gamma_s: f64,
        gamma_isc1: f64,
        gamma_isc2: f64,
        t1: f64,
        epsilon: f64,
    ) -> Result<Self> {
        Self::new(x * gamma_s, gamma_s, gamma_isc1, gamma_isc2, t1, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma_e", self.gamma_e),
            ("gamma_s", self.gamma_s),
            ("gamma_isc1", self.gamma_isc1),
            ("gamma_isc2", self.gamma_isc2),
        ];
        for (name, v) in rates {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.t1 > 0.0) || self.t1.is_nan() {
            return Err(invalid(format!("t1 must be > 0, got {}", self.t1)));
        }
        if !(0.0..=1.0 / 3.0).contains(&self.epsilon) {
            return Err(invalid(format!("epsilon must lie in [0, 1/3], got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Saturation parameter `Γe/Γs`.
    pub fn x(&self) -> f64 {
        self.gamma_e / self.gamma_s
    }

    /// Spin-relaxation rate `1/T1` in MHz (zero for infinite T1).
    pub fn relaxation_rate(&self) -> f64 {
        1.0 / self.t1
    }

    /// Fitted rates for the singlet-ground-state model (b).
    pub fn singlet_reference() -> Self {
        Self { gamma_e: 82.0, gamma_s: 820.0, gamma_isc1: 7.7, gamma_isc2: 0.85, t1: 50.0, epsilon: 0.02 }
    }

    /// Fitted rates for the triplet-ground-state model (e).
    pub fn triplet_reference() -> Self {
        Self { gamma_e: 82.0, gamma_s: 820.0, gamma_isc1: 33.0, gamma_isc2: 0.13, t1: 50.0, epsilon: 0.05 }
    }

    /// Rates inferred from the zero-field three-level analysis, used for
    /// the broad in-plane PL map survey.
    pub fn survey_reference(t1: f64) -> Self {
        Self { gamma_e: 300.0, gamma_s: 600.0, gamma_isc1: 1.8, gamma_isc2: 0.11, t1, epsilon: 0.0 }
    }
}

/// Which manifold a triplet sublevel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TripletManifold {
    Ground,
    Excited,
    Metastable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    SingletGround,
    SingletExcited,
    SingletMetastable,
    TripletSublevel { manifold: TripletManifold, sublevel: usize },
}

impl StateKind {
    pub fn is_excited(self) -> bool {
        matches!(
            self,
            StateKind::SingletExcited | StateKind::TripletSublevel { manifold: TripletManifold::Excited, .. }
        )
    }

    pub fn is_metastable(self) -> bool {
        matches!(
            self,
            StateKind::SingletMetastable | StateKind::TripletSublevel { manifold: TripletManifold::Metastable, .. }
        )
    }
}

/// Generator `R` of `dx/dt = R x`; `R[(to, from)]` is the rate from `from`
/// to `to`, and every column sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    r: DMatrix<f64>,
    labels: Vec<String>,
    kinds: Vec<StateKind>,
    /// Radiative edges as `(to, from)`.
    radiative: Vec<(usize, usize)>,
}

impl RateMatrix {
    /// Builds a rate matrix from its off-diagonal part; the diagonal is
    /// overwritten to conserve probability.
    pub fn from_off_diagonal(
        off: DMatrix<f64>,
        labels: Vec<String>,
        kinds: Vec<StateKind>,
        radiative: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let n = off.nrows();
        if off.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: off.ncols() });
        }
        for len in [labels.len(), kinds.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let r = off;
        for from in 0..n {
            for to in 0..n {
                if to == from {
                    continue;
                }
                let v = r[(to, from)];
                if !v.is_finite() {
                    return Err(invalid(format!("non-finite rate on edge {from} -> {to}")));
                }
                if v < 0.0 {
                    return Err(Error::NegativeRate { from, to, value: v });
                }
            }
        }
        for &(to, from) in &radiative {
            if to >= n || from >= n || to == from {
                return Err(invalid(format!("bad radiative edge {from} -> {to}")));
            }
        }
        let mut m = Self { r, labels, kinds, radiative };
        m.fix_diagonal();
        Ok(m)
    }

    fn fix_diagonal(&mut self) {
        let n = self.dim();
        for col in 0..n {
            self.r[(col, col)] = 0.0;
            let out: f64 = (0..n).filter(|&k| k != col).map(|k| self.r[(k, col)]).sum();
            self.r[(col, col)] = -out;
        }
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self, k: usize) -> StateKind {
        self.kinds[k]
    }

    pub fn kinds(&self) -> &[StateKind] {
        &self.kinds
    }

    /// Radiative edges as `(to, from)` pairs.
    pub fn radiative_edges(&self) -> &[(usize, usize)] {
        &self.radiative
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.r[(to, from)]
    }

    /// Adds `rate` to the `from -> to` edge, keeping columns balanced.
    pub fn add_rate(&mut self, from: usize, to: usize, rate: f64) -> Result<()> {
        if from == to || from >= self.dim() || to >= self.dim() {
            return Err(invalid(format!("bad edge {from} -> {to}")));
        }
        let v = self.r[(to, from)] + rate;
        if v < 0.0 {
            return Err(Error::NegativeRate { from, to, value: v });
        }
        self.r[(to, from)] = v;
        self.r[(from, from)] -= rate;
        Ok(())
    }

    /// Multiplies every rate by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut m = self.clone();
        m.r *= lambda;
        m
    }

    /// Largest absolute column sum; zero up to rounding by construction.
    pub fn column_sum_residual(&self) -> f64 {
        self.r.column_iter().map(|c| c.sum().abs()).fold(0.0, f64::max)
    }

    /// Photon emission rate for populations `x`: Σ over radiative edges.
    pub fn emission_rate(&self, x: &DVector<f64>) -> f64 {
        self.radiative.iter().map(|&(to, from)| self.r[(to, from)] * x[from]).sum()
    }

    pub fn excited_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.kinds[k].is_excited()).collect()
    }

    pub fn metastable_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&k| self.kinds[k].is_metastable()).collect()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.r * x
    }
}

/// ISC weights onto field-dependent eigenstates: `m_i = Σ_μ p_μ |⟨s_μ|s_i⟩|²`.
pub fn coupling_coefficients(p: &SelectionVector, eig: &SpinEigensystem) -> [f64; 3] {
    let w = p.weights();
    let mut m = [0.0; 3];
    for (i, mi) in m.iter_mut().enumerate() {
        *mi = (0..3).map(|mu| w[mu] * eig.projection(mu, i)).sum();
    }
    m
}

/// Assembles the master-equation generator for `diagram` at the field whose
/// triplet eigensystem is `eig`.
///
/// Singlet ground state (5 states): `GS, ES, T1, T2, T3`.
/// Triplet ground state (7 states): `G1..G3, E1..E3, S`, with spin-conserving
/// optical transitions and `1/T1` mixing inside the ground triplet.
pub fn build_rate_matrix(diagram: &LevelDiagram, params: &RateParameters, eig: &SpinEigensystem) -> Result<RateMatrix> {
    params.validate()?;
    if eig.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: eig.dim() });
    }
    let (up, down) = diagram.relaxed_vectors(params.epsilon);
    let m_prime = coupling_coefficients(&up, eig);
    let m = coupling_coefficients(&down, eig);
    let relax = params.relaxation_rate();

    match diagram.ground_spin {
        GroundSpin::Singlet => {
            let (gs, es) = (0, 1);
            let t = |i: usize| 2 + i;
            let mut off = DMatrix::zeros(5, 5);
            off[(es, gs)] = params.gamma_e;
            off[(gs, es)] = params.gamma_s;
            for i in 0..3 {
                off[(t(i), es)] = m_prime[i] * params.gamma_isc1;
                off[(gs, t(i))] = m[i] * params.gamma_isc2;
                for j in 0..3 {
                    if i != j {
                        off[(t(i), t(j))] = relax;
                    }
                }
            }
            let labels = ["GS", "ES", "T1", "T2", "T3"].map(String::from).to_vec();
            let mut kinds = vec![StateKind::SingletGround, StateKind::SingletExcited];
            kinds.extend(
                (0..3).map(|sublevel| StateKind::TripletSublevel { manifold: TripletManifold::Metastable, sublevel }),
            );
            RateMatrix::from_off_diagonal(off, labels, kinds, vec![(gs, es)])
        }
        GroundSpin::Triplet => {
            let g = |i: usize| i;
            let e = |i: usize| 3 + i;
            let s = 6;
            let mut off = DMatrix::zeros(7, 7);
            for i in 0..3 {
                off[(e(i), g(i))] = params.gamma_e;
                off[(g(i), e(i))] = params.gamma_s;
                off[(s, e(i))] = m_prime[i] * params.gamma_isc1;
                off[(g(i), s)] = m[i] * params.gamma_isc2;
                for j in 0..3 {
                    if i != j {
                        off[(g(i), g(j))] = relax;
                    }
                }
            }
            let labels = ["G1", "G2", "G3", "E1", "E2", "E3", "S"].map(String::from).to_vec();
            let mut kinds: Vec<StateKind> = (0..3)
                .map(|sublevel| StateKind::TripletSublevel { manifold: TripletManifold::Ground, sublevel })
                .collect();
            kinds.extend(
                (0..3).map(|sublevel| StateKind::TripletSublevel { manifold: TripletManifold::Excited, sublevel }),
            );
            kinds.push(StateKind::SingletMetastable);
            let radiative = (0..3).map(|i| (g(i), e(i))).collect();
            RateMatrix::from_off_diagonal(off, labels, kinds, radiative)
        }
    }
}
