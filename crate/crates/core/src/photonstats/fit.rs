use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::correlator::G2Histogram;
use crate::error::{invalid, Error, Result};

/// Fit input: bin bounds `[a, b]` in seconds (equal for point samples),
/// values and one-sigma uncertainties.
#[derive(Debug, Clone, PartialEq)]
pub struct FitData {
    pub t_lo: Vec<f64>,
    pub t_hi: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl FitData {
    pub fn new(t_lo: Vec<f64>, t_hi: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let n = y.len();
        for len in [t_lo.len(), t_hi.len(), sigma.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        for k in 0..n {
            if !(t_lo[k] >= 0.0 && t_hi[k] >= t_lo[k] && t_hi[k].is_finite()) {
                return Err(invalid(format!("bad bin bounds at {k}: [{}, {}]", t_lo[k], t_hi[k])));
            }
            if !(sigma[k] > 0.0 && sigma[k].is_finite() && y[k].is_finite()) {
                return Err(invalid(format!("bad value or sigma at {k}")));
            }
        }
        Ok(Self { t_lo, t_hi, y, sigma })
    }

    pub fn from_points(t: &[f64], y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        Self::new(t.to_vec(), t.to_vec(), y, sigma)
    }

    /// Uses only bins that hold at least one coincidence.
    pub fn from_histogram(hist: &G2Histogram) -> Result<Self> {
        let (mut lo, mut hi, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for k in 0..hist.len() {
            if hist.counts[k] > 0 {
                lo.push(hist.bin_edges[k]);
                hi.push(hist.bin_edges[k + 1]);
                y.push(hist.values[k]);
                s.push(hist.poisson_sigma[k]);
            }
        }
        Self::new(lo, hi, y, s)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn center(&self, k: usize) -> f64 {
        0.5 * (self.t_lo[k] + self.t_hi[k])
    }
}

/// Mean of `e^{−t/τ}` over `[a, b]` and its derivative with respect to `ln τ`.
pub fn bin_mean_exp(a: f64, b: f64, tau: f64) -> (f64, f64) {
    let ea = (-a / tau).exp();
    let w = b - a;
    let u = w / tau;
    if u < 1e-300 {
        return (ea, a / tau * ea);
    }
    // g(u) = (1 − e^{−u})/u and its derivative, with small-u series
    let (g, dg) = if u < 1e-4 {
        (1.0 - u / 2.0 + u * u / 6.0, -0.5 + u / 3.0 - u * u / 8.0)
    } else {
        let g = -(-u).exp_m1() / u;
        (g, ((-u).exp() * (1.0 + u) - 1.0) / (u * u))
    };
    let e = ea * g;
    (e, a / tau * e - ea * dg * u)
}

/// `g²(t) = 1 − C₁e^{−t/τ₁} + Σ_{i≥2} C_i e^{−t/τ_i}`.
pub fn empirical_model(c: &[f64], tau: &[f64], t: f64) -> f64 {
    empirical_model_bin(c, tau, t, t)
}

/// Bin average of [`empirical_model`] over `[a, b]`.
pub fn empirical_model_bin(c: &[f64], tau: &[f64], a: f64, b: f64) -> f64 {
    1.0 + c
        .iter()
        .zip(tau)
        .enumerate()
        .map(|(i, (&ci, &ti))| if i == 0 { -ci } else { ci } * bin_mean_exp(a, b, ti).0)
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub orders: Vec<usize>,
    /// Minimum relative reduced-χ² improvement needed to accept the next order.
    pub improvement_threshold: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { orders: vec![2, 3], improvement_threshold: 0.1, restarts: 5, seed: 0x5eed, max_iterations: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalFit {
    #[serde(rename = "n")]
    pub order: usize,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    /// Seconds, ascending.
    #[serde(rename = "tau_s")]
    pub tau: Vec<f64>,
    #[serde(rename = "C_sigma")]
    pub c_sigma: Vec<f64>,
    #[serde(rename = "tau_sigma_s")]
    pub tau_sigma: Vec<f64>,
    pub reduced_chi2: f64,
    pub chi2: f64,
    pub dof: usize,
    /// Covariance of `(C₁..C_n, τ₁..τ_n)`, from the weighted Jacobian at the
    /// optimum, not rescaled by the reduced χ².
    pub covariance: Vec<Vec<f64>>,
}

impl EmpiricalFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        empirical_model(&self.c, &self.tau, t)
    }

    pub fn evaluate_bin(&self, a: f64, b: f64) -> f64 {
        empirical_model_bin(&self.c, &self.tau, a, b)
    }
}

struct LmOutcome {
    p: Vec<f64>,
    chi2: f64,
    jtj: DMatrix<f64>,
}

/// Weighted Levenberg–Marquardt. `model(p, a, b, grad)` returns the model
/// value on bin `[a, b]` and writes `∂f/∂p` into `grad`.
fn levenberg_marquardt<F>(
    data: &FitData,
    p0: &[f64],
    model: &F,
    bounds: &[(f64, f64)],
    max_iter: usize,
) -> Result<LmOutcome>
where
    F: Fn(&[f64], f64, f64, &mut [f64]) -> f64,
{
    let np = p0.len();
    let n = data.len();
    let mut grad = vec![0.0; np];

    let eval = |p: &[f64], grad: &mut [f64], jac: Option<&mut DMatrix<f64>>, res: Option<&mut DVector<f64>>| -> f64 {
        let mut chi2 = 0.0;
        let mut jac = jac;
        let mut res = res;
        for k in 0..n {
            let f = model(p, data.t_lo[k], data.t_hi[k], grad);
            let r = (data.y[k] - f) / data.sigma[k];
            chi2 += r * r;
            if let Some(j) = jac.as_deref_mut() {
                for (i, g) in grad.iter().enumerate() {
                    j[(k, i)] = g / data.sigma[k];
                }
            }
            if let Some(rv) = res.as_deref_mut() {
                rv[k] = r;
            }
        }
        chi2
    };
    let in_bounds = |p: &[f64]| p.iter().zip(bounds).all(|(v, (lo, hi))| v.is_finite() && v >= lo && v <= hi);

    let mut p = p0.to_vec();
    if !in_bounds(&p) {
        return Err(Error::Fit("initial guess outside parameter bounds".into()));
    }
    let mut jac = DMatrix::zeros(n, np);
    let mut res = DVector::zeros(n);
    let mut chi2 = eval(&p, &mut grad, Some(&mut jac), Some(&mut res));
    if !chi2.is_finite() {
        return Err(Error::Fit("non-finite χ² at initial guess".into()));
    }
    let mut lambda = 1e-3;

    for _ in 0..max_iter {
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let dmax = jtj.diagonal().max();
        let mut improved = false;
        while lambda < 1e20 {
            let mut a = jtj.clone();
            for i in 0..np {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * dmax);
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let delta = chol.solve(&jtr);
            let trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            if !in_bounds(&trial) {
                lambda *= 4.0;
                continue;
            }
            let chi2_new = eval(&trial, &mut grad, None, None);
            if chi2_new.is_finite() && chi2_new <= chi2 {
                let small = delta.iter().zip(&p).all(|(d, v)| d.abs() <= 1e-12 * (1.0 + v.abs()));
                let flat = chi2 - chi2_new <= 1e-15 * chi2;
                p = trial;
                chi2 = eval(&p, &mut grad, Some(&mut jac), Some(&mut res));
                lambda = (lambda * 0.3).max(1e-15);
                if small || flat || chi2 <= 1e-28 * n as f64 {
                    let jtj = jac.transpose() * &jac;
                    return Ok(LmOutcome { p, chi2, jtj });
                }
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no downhill step at any damping: a (local) minimum
            let jtj = jac.transpose() * &jac;
            return Ok(LmOutcome { p, chi2, jtj });
        }
    }
    Err(Error::Fit(format!("no convergence within {max_iter} iterations")))
}

/// Inverts the normal matrix; rejects numerically singular systems.
fn covariance_of(jtj: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let np = jtj.nrows();
    let d: Vec<f64> = (0..np).map(|i| jtj[(i, i)].sqrt()).collect();
    if d.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Fit("degenerate covariance: a parameter has no influence on the model".into()));
    }
    let scaled = DMatrix::from_fn(np, np, |i, j| jtj[(i, j)] / (d[i] * d[j]));
    let ev = scaled.clone().symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    if !(lo > 1e-13 * hi) {
        return Err(Error::Fit(format!("degenerate covariance (condition {:.3e})", hi / lo.max(f64::MIN_POSITIVE))));
    }
    let inv = scaled.cholesky().ok_or_else(|| Error::Fit("degenerate covariance".into()))?.inverse();
    Ok(DMatrix::from_fn(np, np, |i, j| inv[(i, j)] / (d[i] * d[j])))
}

fn empirical_gradient(order: usize) -> impl Fn(&[f64], f64, f64, &mut [f64]) -> f64 {
    move |p: &[f64], a: f64, b: f64, grad: &mut [f64]| {
        let mut f = 1.0;
        for i in 0..order {
            let tau = p[order + i].exp();
            let (e, de) = bin_mean_exp(a, b, tau);
            let s = if i == 0 { -1.0 } else { 1.0 };
            f += s * p[i] * e;
            grad[i] = s * e;
            grad[order + i] = s * p[i] * de;
        }
        f
    }
}

struct Seeds {
    c: Vec<f64>,
    tau: Vec<f64>,
}

fn feature_seeds(data: &FitData, order: usize) -> Seeds {
    let n = data.len();
    let t: Vec<f64> = (0..n).map(|k| data.center(k)).collect();
    let head = n.min(3);
    let y0 = data.y[..head].iter().sum::<f64>() / head as f64;
    let (kp, yp) = data.y.iter().enumerate().fold((0, f64::MIN), |m, (k, &v)| if v > m.1 { (k, v) } else { m });
    let t_peak = t[kp].max(t[0]).max(1e-15);
    let cb = (yp - 1.0).max(0.05);
    let c1 = (1.0 + cb - y0).max(0.1);

    let half = 0.5 * (y0 + yp);
    let tau1 = (0..=kp)
        .find(|&k| data.y[k] >= half)
        .map(|k| t[k] / std::f64::consts::LN_2)
        .filter(|v| *v > 0.0)
        .unwrap_or(t_peak / 5.0);

    // log-linear regression on the decaying flank after the peak
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&tk, &yk), &sk) in t.iter().zip(&data.y).zip(&data.sigma).take(n).skip(kp) {
        let excess = yk - 1.0;
        if excess > 0.1 * cb && excess < 0.9 * cb && excess > 2.0 * sk {
            let (x, y) = (tk, excess.ln());
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            m += 1.0;
        }
    }
    let slope = if m >= 2.0 { (m * sxy - sx * sy) / (m * sxx - sx * sx) } else { f64::NAN };
    let mut tau2 = if slope.is_finite() && slope < 0.0 { -1.0 / slope } else { 3.0 * t_peak };
    if tau2 <= 2.0 * tau1 {
        tau2 = 10.0 * tau1;
    }

    let mut c = vec![c1];
    let mut tau = vec![tau1];
    for i in 1..order {
        c.push(if i == 1 { cb } else { cb * 0.05f64.powi(i as i32 - 1) });
        tau.push(tau2 * 10f64.powi(i as i32 - 1));
    }
    Seeds { c, tau }
}

fn finish(order: usize, p: &[f64], chi2: f64, jtj: &DMatrix<f64>, dof: usize) -> Result<EmpiricalFit> {
    let mut c: Vec<f64> = p[..order].to_vec();
    let mut tau: Vec<f64> = p[order..].iter().map(|v| v.exp()).collect();
    if !(c[0] > 0.0) {
        return Err(Error::Fit("antibunching amplitude C1 is not positive".into()));
    }
    let cov_log = covariance_of(jtj)?;
    // (C, ln τ) -> (C, τ)
    let scale: Vec<f64> = (0..2 * order).map(|i| if i < order { 1.0 } else { tau[i - order] }).collect();
    let mut cov = DMatrix::from_fn(2 * order, 2 * order, |i, j| cov_log[(i, j)] * scale[i] * scale[j]);

    // bunching components ordered by lifetime; the antibunching term stays first
    let mut idx: Vec<usize> = (1..order).collect();
    idx.sort_by(|&a, &b| tau[a].total_cmp(&tau[b]));
    let perm: Vec<usize> = std::iter::once(0).chain(idx).collect();
    let full: Vec<usize> = perm.iter().copied().chain(perm.iter().map(|&k| k + order)).collect();
    c = perm.iter().map(|&k| c[k]).collect();
    tau = perm.iter().map(|&k| tau[k]).collect();
    cov = DMatrix::from_fn(2 * order, 2 * order, |i, j| cov[(full[i], full[j])]);
    if tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Fit("lifetimes are not strictly ascending".into()));
    }

    let c_sigma = (0..order).map(|i| cov[(i, i)].sqrt()).collect();
    let tau_sigma = (0..order).map(|i| cov[(order + i, order + i)].sqrt()).collect();
    let covariance = (0..2 * order).map(|i| cov.row(i).iter().copied().collect()).collect();
    Ok(EmpiricalFit { order, c, tau, c_sigma, tau_sigma, reduced_chi2: chi2 / dof as f64, chi2, dof, covariance })
}

/// Fits one model order: feature-based seeds plus jittered restarts; the
/// lowest-χ² valid optimum wins.
pub fn fit_order(data: &FitData, order: usize, opts: &FitOptions) -> Result<EmpiricalFit> {
    if !(2..=4).contains(&order) {
        return Err(invalid(format!("model order must be 2, 3 or 4, got {order}")));
    }
    let np = 2 * order;
    if data.len() <= np {
        return Err(invalid(format!("{} points cannot constrain {np} parameters", data.len())));
    }
    let t_min = data.t_hi.iter().copied().fold(f64::INFINITY, f64::min).max(1e-15);
    let t_max = data.t_hi.iter().copied().fold(0.0, f64::max).max(t_min);
    let ln_lo = (t_min * 1e-3).ln();
    let ln_hi = (t_max * 1e3).ln();
    let bounds: Vec<(f64, f64)> = (0..np).map(|i| if i < order { (-1e6, 1e6) } else { (ln_lo, ln_hi) }).collect();

    let seeds = feature_seeds(data, order);
    let model = empirical_gradient(order);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (order as u64) << 32);
    let mut best: Option<EmpiricalFit> = None;
    let mut last_err = Error::Fit("no fit attempted".into());
    for attempt in 0..=opts.restarts {
        let mut p: Vec<f64> = seeds.c.clone();
        p.extend(seeds.tau.iter().map(|t| t.ln().clamp(ln_lo, ln_hi)));
        if attempt > 0 {
            for (i, v) in p.iter_mut().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                if i < order {
                    *v *= (0.3 * z).exp();
                } else {
                    *v = (*v + 0.7 * z).clamp(ln_lo, ln_hi);
                }
            }
        }
        let outcome = levenberg_marquardt(data, &p, &model, &bounds, opts.max_iterations)
            .and_then(|o| finish(order, &o.p, o.chi2, &o.jtj, data.len() - np));
        match outcome {
            Ok(fit) => {
                if !best.as_ref().is_some_and(|b| fit.chi2 >= b.chi2) {
                    best = Some(fit);
                }
            }
            Err(e) => last_err = e,
        }
    }
    best.ok_or_else(|| match last_err {
        Error::Fit(msg) => Error::Fit(format!("order {order}: no valid fit after {} restarts ({msg})", opts.restarts)),
        e => e,
    })
}

/// Order selection: starting from the lowest order, the next order is
/// accepted while it lowers the reduced χ² by more than the threshold.
pub fn fit_empirical_data(data: &FitData, opts: &FitOptions) -> Result<EmpiricalFit> {
    let mut orders = opts.orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let top = *orders.last().ok_or_else(|| invalid("no model orders requested"))?;
    if data.len() < 10 * top {
        return Err(invalid(format!("{} populated bins; at least {} needed for order {top}", data.len(), 10 * top)));
    }
    let mut chosen: Option<EmpiricalFit> = None;
    let mut first_err = None;
    for &n in &orders {
        match (fit_order(data, n, opts), &chosen) {
            (Ok(f), None) => chosen = Some(f),
            (Ok(f), Some(prev)) => {
                if (prev.reduced_chi2 - f.reduced_chi2) / prev.reduced_chi2 > opts.improvement_threshold {
                    chosen = Some(f);
                } else {
                    break;
                }
            }
            (Err(e), None) => {
                first_err.get_or_insert(e);
            }
            // a failed higher order counts as no improvement
            (Err(_), Some(_)) => break,
        }
    }
    let fit = chosen.ok_or_else(|| first_err.unwrap_or_else(|| Error::Fit("no order converged".into())))?;
    if fit.c[0] < 3.0 * fit.c_sigma[0] {
        return Err(Error::Fit(format!(
            "unidentifiable: antibunching amplitude {:.3e} ± {:.3e} is not significant",
            fit.c[0], fit.c_sigma[0]
        )));
    }
    Ok(fit)
}

pub fn fit_empirical(hist: &G2Histogram, orders: &[usize]) -> Result<EmpiricalFit> {
    let data = FitData::from_histogram(hist)?;
    fit_empirical_data(&data, &FitOptions { orders: orders.to_vec(), ..Default::default() })
}

/// Short-delay form `g̃(t) = 1 − C̃₁e^{−t/τ₁} + C̃₂` with `C̃₂` a constant offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortDelayFit {
    pub c1: f64,
    pub c2: f64,
    pub tau1: f64,
    /// `1 − C̃₁ + C̃₂` and its standard error.
    pub g2_zero: f64,
    pub g2_zero_sigma: f64,
    pub reduced_chi2: f64,
}

pub fn fit_short_delay(data: &FitData, max_iterations: usize) -> Result<ShortDelayFit> {
    if data.len() <= 3 {
        return Err(invalid("short-delay fit needs more than 3 points"));
    }
    let model = |p: &[f64], a: f64, b: f64, grad: &mut [f64]| {
        let (e, de) = bin_mean_exp(a, b, p[2].exp());
        grad[0] = -e;
        grad[1] = 1.0;
        grad[2] = -p[0] * de;
        1.0 - p[0] * e + p[1]
    };
    let seeds = feature_seeds(data, 2);
    let t_max = data.t_hi.iter().copied().fold(0.0, f64::max);
    let t_min = data.t_hi.iter().copied().fold(f64::INFINITY, f64::min).max(1e-15);
    let bounds = [(-1e6, 1e6), (-1e6, 1e6), ((t_min * 1e-3).ln(), (t_max * 1e3).ln())];
    let tail = data.y[data.len() - 1] - 1.0;
    let p0 = [seeds.c[0], tail, seeds.tau[0].ln().clamp(bounds[2].0, bounds[2].1)];
    let out = levenberg_marquardt(data, &p0, &model, &bounds, max_iterations)?;
    let cov = covariance_of(&out.jtj)?;
    let var = cov[(0, 0)] + cov[(1, 1)] - 2.0 * cov[(0, 1)];
    Ok(ShortDelayFit {
        c1: out.p[0],
        c2: out.p[1],
        tau1: out.p[2].exp(),
        g2_zero: 1.0 - out.p[0] + out.p[1],
        g2_zero_sigma: var.max(0.0).sqrt(),
        reduced_chi2: out.chi2 / (data.len() - 3) as f64,
    })
}
