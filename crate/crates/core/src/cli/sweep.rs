//! Magnetic-field sweeps of steady PL, ODMR contrast and photon correlations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::CsvTable;
use crate::config::SimConfig;
use crate::dynamics::{
    metastable_population, odmr_pl_variation, pl_variation, simulate_g2_from, steady_pl, steady_state, G2Curve,
    G2Method, G2Options, InitialCondition,
};
use crate::error::{invalid, Result};
use crate::photonstats::{fit_empirical_data, EmpiricalFit, FitData, FitOptions};
use crate::spin::FieldVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "axis")]
pub enum SweepDirection {
    /// In-plane, at `phi` radians from x.
    InPlane {
        phi: f64,
    },
    Z,
}

/// Field sampling pattern, reduced units `gμB B/D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SweepMode {
    /// `grid_n × grid_n` in-plane grid over `[−b_max, b_max]²`, x fastest.
    InPlaneMap { b_max: f64, grid_n: usize },
    /// `n_points` angles evenly covering `[0, 2π)` at magnitude `b`.
    PhiSweep { b: f64, n_points: usize },
    /// `n_points` magnitudes from 0 to `b_max` along one direction.
    MagnitudeSweep { direction: SweepDirection, b_max: f64, n_points: usize },
}

impl SweepMode {
    pub fn validate(&self) -> Result<()> {
        let check_b = |b: f64| {
            if b >= 0.0 && b.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("field magnitude must be finite and >= 0, got {b}")))
            }
        };
        match *self {
            SweepMode::InPlaneMap { b_max, grid_n } => {
                check_b(b_max)?;
                if grid_n % 2 == 0 {
                    return Err(invalid(format!("grid_n must be odd so B = 0 is sampled, got {grid_n}")));
                }
            }
            SweepMode::PhiSweep { b, n_points } => {
                check_b(b)?;
                if n_points < 2 {
                    return Err(invalid("n_points must be >= 2"));
                }
            }
            SweepMode::MagnitudeSweep { direction, b_max, n_points } => {
                check_b(b_max)?;
                if n_points < 2 {
                    return Err(invalid("n_points must be >= 2"));
                }
                if let SweepDirection::InPlane { phi } = direction {
                    if !phi.is_finite() {
                        return Err(invalid("phi must be finite"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Sample fields in output order.
    pub fn fields(&self) -> Result<Vec<FieldVector>> {
        self.validate()?;
        match *self {
            SweepMode::InPlaneMap { b_max, grid_n } => {
                let axis = |k: usize| {
                    if grid_n == 1 {
                        0.0
                    } else {
                        b_max * (2.0 * k as f64 / (grid_n - 1) as f64 - 1.0)
                    }
                };
                let mut out = Vec::with_capacity(grid_n * grid_n);
                for iy in 0..grid_n {
                    for ix in 0..grid_n {
                        out.push(FieldVector::cartesian(axis(ix), axis(iy), 0.0)?);
                    }
                }
                Ok(out)
            }
            SweepMode::PhiSweep { b, n_points } => (0..n_points)
                .map(|k| FieldVector::in_plane(b, 2.0 * std::f64::consts::PI * k as f64 / n_points as f64))
                .collect(),
            SweepMode::MagnitudeSweep { direction, b_max, n_points } => (0..n_points)
                .map(|k| {
                    let b = b_max * k as f64 / (n_points - 1) as f64;
                    match direction {
                        SweepDirection::InPlane { phi } => FieldVector::in_plane(b, phi),
                        SweepDirection::Z => FieldVector::along_z(b),
                    }
                })
                .collect(),
        }
    }

    fn has_bz(&self) -> bool {
        matches!(self, SweepMode::MagnitudeSweep { direction: SweepDirection::Z, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub config: SimConfig,
}

/// Steady-state observables at one field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlPoint {
    pub field: FieldVector,
    /// Photon emission rate, MHz.
    pub pl: f64,
    /// `(PL(B) − PL(0)) / PL(0)`.
    pub pl_variation: f64,
    pub metastable_population: f64,
}

/// Steady PL and its variation at every sweep field.
///
/// Points are evaluated on the current rayon pool and returned in sweep order.
pub fn pl_map(spec: &SweepSpec) -> Result<Vec<PlPoint>> {
    let fields = spec.mode.fields()?;
    let cfg = &spec.config;
    cfg.validate()?;
    let r0 = cfg.rate_matrix(&FieldVector::zero())?;
    let pl0 = steady_pl(&r0, &steady_state(&r0)?);
    fields
        .par_iter()
        .map(|f| {
            let r = cfg.rate_matrix(f)?;
            let x = steady_state(&r)?;
            let pl = steady_pl(&r, &x);
            Ok(PlPoint {
                field: *f,
                pl,
                pl_variation: pl_variation(pl, pl0),
                metastable_population: metastable_population(&r, &x),
            })
        })
        .collect()
}

/// Columns `bx, by, pl, pl_variation, metastable_population`; z-axis
/// magnitude sweeps add `bz` after `by`.
pub fn pl_map_table(mode: &SweepMode, points: &[PlPoint]) -> Result<CsvTable> {
    let with_bz = mode.has_bz();
    let mut t = if with_bz {
        CsvTable::new(&["bx", "by", "bz", "pl", "pl_variation", "metastable_population"])
    } else {
        CsvTable::new(&["bx", "by", "pl", "pl_variation", "metastable_population"])
    };
    for p in points {
        let mut row = vec![p.field.bx, p.field.by];
        if with_bz {
            row.push(p.field.bz);
        }
        row.extend([p.pl, p.pl_variation, p.metastable_population]);
        t.push(row)?;
    }
    Ok(t)
}

/// ODMR PL variation for the 1-based master-equation state `pair`, driven at
/// `gamma_odmr` MHz, at every sweep field.
pub fn odmr_map(spec: &SweepSpec, pair: (usize, usize), gamma_odmr: f64) -> Result<CsvTable> {
    let fields = spec.mode.fields()?;
    let cfg = &spec.config;
    let diagram = cfg.level_diagram()?;
    let params = cfg.rate_parameters()?;
    let values: Vec<f64> = fields
        .par_iter()
        .map(|f| odmr_pl_variation(&diagram, &params, &cfg.eigensystem(f)?, pair, gamma_odmr))
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&["bx", "by", "bz", "odmr_pl_variation"]);
    for (f, v) in fields.iter().zip(values) {
        t.push(vec![f.bx, f.by, f.bz, v])?;
    }
    Ok(t)
}

/// g² simulations over in-plane angles at fixed reduced field `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2SweepSpec {
    pub config: SimConfig,
    pub b: f64,
    /// Radians.
    pub phis: Vec<f64>,
    /// Seconds, strictly increasing.
    pub delays: Vec<f64>,
    pub method: G2Method,
    /// Start from the steady state instead of the post-emission state.
    pub steady_start: bool,
    /// Model orders tried by the empirical fit; empty disables fitting.
    pub orders: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2SweepPoint {
    pub phi: f64,
    /// Steady photon rate, MHz.
    pub pl: f64,
    pub curve: G2Curve,
    pub fit: Option<EmpiricalFit>,
}

/// Fits the empirical multi-exponential model to a noiseless simulated curve.
///
/// Every delay gets the same nominal uncertainty, so the fit is an
/// unweighted least-squares description of the curve.
pub fn fit_simulated_curve(curve: &G2Curve, orders: &[usize]) -> Result<EmpiricalFit> {
    let data = FitData::from_points(&curve.delays, curve.values.clone(), vec![1e-3; curve.len()])?;
    fit_empirical_data(&data, &FitOptions { orders: orders.to_vec(), ..Default::default() })
}

pub fn g2_sweep(spec: &G2SweepSpec) -> Result<Vec<G2SweepPoint>> {
    if spec.phis.is_empty() {
        return Err(invalid("at least one angle is required"));
    }
    let opts = G2Options {
        method: spec.method,
        initial: if spec.steady_start { InitialCondition::SteadyState } else { InitialCondition::PostEmission },
        ..Default::default()
    };
    spec.phis
        .par_iter()
        .map(|&phi| {
            let r = spec.config.rate_matrix(&FieldVector::in_plane(spec.b, phi)?)?;
            let curve = simulate_g2_from(&r, &spec.delays, &opts)?;
            let fit = if spec.orders.is_empty() { None } else { Some(fit_simulated_curve(&curve, &spec.orders)?) };
            Ok(G2SweepPoint { phi, pl: curve.mean_pl, curve, fit })
        })
        .collect()
}

/// Long-format curves: `phi_deg, t_s, g2`.
pub fn g2_sweep_table(points: &[G2SweepPoint]) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["phi_deg", "t_s", "g2"]);
    for p in points {
        for (&d, &v) in p.curve.delays.iter().zip(&p.curve.values) {
            t.push(vec![p.phi.to_degrees(), d, v])?;
        }
    }
    Ok(t)
}
