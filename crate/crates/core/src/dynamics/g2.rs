use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::integrate::{integrate_rk4, Rk4Options};
use super::rates::{build_rate_matrix, RateMatrix, RateParameters};
use super::steady::steady_state;
use crate::constants::seconds_to_us;
use crate::error::{invalid, Error, Result};
use crate::spin::SpinEigensystem;
use crate::symmetry::LevelDiagram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum G2Method {
    /// Eigendecomposition, falling back to RK4 when `R` is defective.
    #[default]
    Auto,
    Eigen,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialCondition {
    /// State right after a photon has been emitted.
    #[default]
    PostEmission,
    /// Start in the steady state (g² is then identically 1).
    SteadyState,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct G2Options {
    pub method: G2Method,
    pub initial: InitialCondition,
    pub rk4: Rk4Options,
}

impl G2Options {
    pub fn with_method(method: G2Method) -> Self {
        Self { method, ..Default::default() }
    }
}

/// Second-order correlation versus delay (seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Curve {
    pub delays: Vec<f64>,
    pub values: Vec<f64>,
    /// Evaluation route actually taken (never `Auto`).
    pub method: G2Method,
    /// Steady-state photon rate, MHz.
    pub mean_pl: f64,
}

impl G2Curve {
    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    pub fn value_at(&self, i: usize) -> (f64, f64) {
        (self.delays[i], self.values[i])
    }
}

/// `points_per_decade` log-spaced delays from `t_min` to `t_max` (seconds),
/// both ends included.
pub fn log_delays(t_min: f64, t_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) || points_per_decade == 0 {
        return Err(invalid(format!("bad log delay range [{t_min}, {t_max}] x {points_per_decade}")));
    }
    let decades = (t_max / t_min).log10();
    let n = ((decades * points_per_decade as f64).round() as usize).max(1);
    Ok((0..=n).map(|k| if k == n { t_max } else { t_min * 10f64.powf(decades * k as f64 / n as f64) }).collect())
}

/// Default sampling: 1 ns to 10 ms, 200 points per decade.
pub fn default_delays() -> Vec<f64> {
    log_delays(1e-9, 1e-2, 200).expect("static range")
}

/// Population right after a photon emission: each radiative edge `(to, from)`
/// deposits its share of the steady emission flux into `to`.
pub fn post_emission_state(r: &RateMatrix, x_ss: &DVector<f64>) -> Result<DVector<f64>> {
    let mut x0 = DVector::zeros(r.dim());
    let mut total = 0.0;
    for &(to, from) in r.radiative_edges() {
        let flux = r.rate(from, to) * x_ss[from];
        x0[to] += flux;
        total += flux;
    }
    if !(total > 0.0) {
        return Err(Error::RankDeficient("steady state emits no photons".into()));
    }
    Ok(x0 / total)
}

pub fn simulate_g2(
    diagram: &LevelDiagram,
    params: &RateParameters,
    eig: &SpinEigensystem,
    delays: &[f64],
    opts: &G2Options,
) -> Result<G2Curve> {
    let r = build_rate_matrix(diagram, params, eig)?;
    simulate_g2_from(&r, delays, opts)
}

/// g²(t) = PL(t)/⟨PL⟩ for the generator `r` at `delays` (seconds, ≥ 0,
/// strictly increasing).
pub fn simulate_g2_from(r: &RateMatrix, delays: &[f64], opts: &G2Options) -> Result<G2Curve> {
    if delays.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("delays must be finite and >= 0"));
    }
    if delays.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("delays must be strictly increasing"));
    }
    let x_ss = steady_state(r)?.to_dvector();
    let mean_pl = r.emission_rate(&x_ss);
    if !(mean_pl > 0.0) {
        return Err(Error::RankDeficient("steady state emits no photons".into()));
    }
    let x0 = match &opts.initial {
        InitialCondition::PostEmission => post_emission_state(r, &x_ss)?,
        InitialCondition::SteadyState => x_ss.clone(),
        InitialCondition::Custom(v) => {
            if v.len() != r.dim() {
                return Err(Error::DimensionMismatch { expected: r.dim(), got: v.len() });
            }
            DVector::from_column_slice(v)
        }
    };
    let times: Vec<f64> = delays.iter().map(|&t| seconds_to_us(t)).collect();

    let (states, method) = match opts.method {
        G2Method::Rk4 => (integrate_rk4(r, &x0, &times, &opts.rk4)?, G2Method::Rk4),
        G2Method::Eigen => (ModalSolution::new(r, &x_ss, &x0)?.evaluate(&times), G2Method::Eigen),
        G2Method::Auto => match ModalSolution::new(r, &x_ss, &x0) {
            Ok(sol) => (sol.evaluate(&times), G2Method::Eigen),
            Err(Error::RankDeficient(_)) => (integrate_rk4(r, &x0, &times, &opts.rk4)?, G2Method::Rk4),
            Err(e) => return Err(e),
        },
    };

    let values = times
        .iter()
        .zip(&states)
        .map(|(&t, x)| {
            // exactly the initial condition at zero delay
            let x = if t == 0.0 { &x0 } else { x };
            (r.emission_rate(x) / mean_pl).max(0.0)
        })
        .collect();
    Ok(G2Curve { delays: delays.to_vec(), values, method, mean_pl })
}

/// `x(t) = Σ_k U_k exp(B_k t) c_k` over invariant subspaces of `R`.
struct ModalSolution {
    blocks: Vec<Block>,
}

struct Block {
    u: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    c: DVector<Complex64>,
}

const CLUSTER_TOL: f64 = 1e-8;

impl ModalSolution {
    fn new(r: &RateMatrix, x_ss: &DVector<f64>, x0: &DVector<f64>) -> Result<Self> {
        let m = r.matrix();
        let n = m.nrows();
        let norm = m.amax() * n as f64;
        let rc: DMatrix<Complex64> = m.map(|v| Complex64::new(v, 0.0));

        let mut lambdas: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
        let zero = (0..n)
            .min_by(|&a, &b| lambdas[a].norm().total_cmp(&lambdas[b].norm()))
            .ok_or_else(|| invalid("empty rate matrix"))?;
        lambdas.remove(zero);
        lambdas.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

        let mut clusters: Vec<Vec<Complex64>> = Vec::new();
        for l in lambdas {
            match clusters.last_mut() {
                Some(c) if (c[0] - l).norm() <= CLUSTER_TOL * l.norm().max(c[0].norm()) => c.push(l),
                _ => clusters.push(vec![l]),
            }
        }

        let mut subspaces: Vec<(DMatrix<Complex64>, DMatrix<Complex64>)> = Vec::new();
        let ss = x_ss.map(|v| Complex64::new(v, 0.0));
        subspaces.push((DMatrix::from_column_slice(n, 1, ss.as_slice()), DMatrix::zeros(1, 1)));

        for cl in &clusters {
            let k = cl.len();
            let mean = cl.iter().sum::<Complex64>() / k as f64;
            let shifted = &rc - DMatrix::<Complex64>::identity(n, n) * mean;
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.ok_or_else(|| Error::RankDeficient("SVD failed".into()))?;
            // singular values come sorted descending
            let tail = svd.singular_values[n - k];
            if tail > 1e-6 * norm {
                return Err(Error::RankDeficient(format!(
                    "defective eigenvalue cluster at {mean:.6e} (singular value {tail:.3e})"
                )));
            }
            let mut u = DMatrix::zeros(n, k);
            for j in 0..k {
                let row = v_t.row(n - k + j);
                for i in 0..n {
                    u[(i, j)] = row[i].conj();
                }
            }
            let b = u.adjoint() * &rc * &u;
            let resid = (&rc * &u - &u * &b).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if resid > CLUSTER_TOL * norm {
                return Err(Error::RankDeficient(format!("cluster at {mean:.6e} is not invariant ({resid:.3e})")));
            }
            subspaces.push((u, b));
        }

        let mut w = DMatrix::zeros(n, n);
        let mut col = 0;
        for (u, _) in &subspaces {
            w.view_mut((0, col), (n, u.ncols())).copy_from(u);
            col += u.ncols();
        }
        if col != n {
            return Err(Error::RankDeficient("eigenvector count mismatch".into()));
        }
        let rhs = x0.map(|v| Complex64::new(v, 0.0));
        let c =
            w.clone().lu().solve(&rhs).ok_or_else(|| Error::RankDeficient("eigenvector basis is singular".into()))?;
        let recon = (&w * &c - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let weight: f64 = c.iter().map(|z| z.norm()).sum();
        if recon > 1e-12 || weight > 1e6 {
            return Err(Error::RankDeficient(format!(
                "ill-conditioned modal expansion (residual {recon:.3e}, weight {weight:.3e})"
            )));
        }

        let mut blocks = Vec::with_capacity(subspaces.len());
        let mut start = 0;
        for (u, b) in subspaces {
            let k = u.ncols();
            let ck = c.rows(start, k).into_owned();
            start += k;
            blocks.push(Block { u, b, c: ck });
        }
        Ok(Self { blocks })
    }

    fn evaluate(&self, times: &[f64]) -> Vec<DVector<f64>> {
        times
            .iter()
            .map(|&t| {
                let mut x = DVector::<Complex64>::zeros(self.blocks[0].u.nrows());
                for blk in &self.blocks {
                    let evolved = if blk.b.nrows() == 1 {
                        &blk.c * (blk.b[(0, 0)] * t).exp()
                    } else {
                        (&blk.b * Complex64::new(t, 0.0)).exp() * &blk.c
                    };
                    x += &blk.u * evolved;
                }
                x.map(|z| z.re)
            })
            .collect()
    }
}
