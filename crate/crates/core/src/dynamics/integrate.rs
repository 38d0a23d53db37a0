use nalgebra::DVector;

use super::rates::RateMatrix;
use crate::error::{invalid, Error, Result};

/// Tolerances for the step-doubling RK4 integrator. Times are in µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rk4Options {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for Rk4Options {
    fn default() -> Self {
        Self { rtol: 1e-13, atol: 1e-16, initial_step: 1e-5, min_step: 1e-15, max_steps: 200_000_000 }
    }
}

struct Stepper<'a> {
    a: &'a [f64],
    n: usize,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(a: &'a [f64], n: usize) -> Self {
        Self { a, n, k: std::array::from_fn(|_| vec![0.0; n]), tmp: vec![0.0; n] }
    }

    // column-major matvec
    fn deriv(a: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let col = &a[j * n..(j + 1) * n];
            for (o, &c) in out.iter_mut().zip(col) {
                *o += c * xj;
            }
        }
    }

    fn step(&mut self, x: &[f64], h: f64, out: &mut [f64]) {
        let n = self.n;
        let [k1, k2, k3, k4] = &mut self.k;
        Self::deriv(self.a, n, x, k1);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        Self::deriv(self.a, n, &self.tmp, k2);
        for i in 0..n {
            self.tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        Self::deriv(self.a, n, &self.tmp, k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * k3[i];
        }
        Self::deriv(self.a, n, &self.tmp, k4);
        for i in 0..n {
            out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Integrates `dx/dt = R x` from `t = 0` and returns the state at each of
/// `times` (µs, non-decreasing, ≥ 0). Steps are adapted by step doubling and
/// always land exactly on the requested times.
pub fn integrate_rk4(r: &RateMatrix, x0: &DVector<f64>, times: &[f64], opts: &Rk4Options) -> Result<Vec<DVector<f64>>> {
    let n = r.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("integration times must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("integration times must be non-decreasing"));
    }

    let a = r.matrix().as_slice();
    let mut st = Stepper::new(a, n);
    let mut x: Vec<f64> = x0.iter().copied().collect();
    let (mut full, mut half, mut two) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut t = 0.0;
    let mut h = opts.initial_step;
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());

    for &target in times {
        while t < target {
            let remaining = target - t;
            let landing = h >= remaining;
            let hs = if landing { remaining } else { h };

            st.step(&x, hs, &mut full);
            st.step(&x, 0.5 * hs, &mut half);
            st.step(&half, 0.5 * hs, &mut two);

            let scale = x.iter().chain(two.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
            let err = two.iter().zip(&full).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / 15.0;
            let tol = opts.atol + opts.rtol * scale;

            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration(format!("exceeded {} steps at t = {t:.6e} µs", opts.max_steps)));
            }
            if !err.is_finite() {
                return Err(Error::Integration(format!("non-finite state at t = {t:.6e} µs")));
            }

            if err <= tol {
                t = if landing { target } else { t + hs };
                // local Richardson extrapolation
                for (a, b) in two.iter_mut().zip(&full) {
                    *a += (*a - b) / 15.0;
                }
                std::mem::swap(&mut x, &mut two);
                let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) };
                // a short landing step says nothing about the natural step size
                if !landing || hs >= h {
                    h = hs * grow;
                }
            } else {
                h = hs * (0.9 * (tol / err).powf(0.2)).clamp(0.1, 0.9);
                if h < opts.min_step {
                    return Err(Error::Integration(format!("step size underflow at t = {t:.6e} µs")));
                }
            }
        }
        out.push(DVector::from_column_slice(&x));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::rates::StateKind;
    use nalgebra::DMatrix;

    fn two_level(ge: f64, gs: f64) -> RateMatrix {
        let mut off = DMatrix::zeros(2, 2);
        off[(1, 0)] = ge;
        off[(0, 1)] = gs;
        RateMatrix::from_off_diagonal(
            off,
            vec!["GS".into(), "ES".into()],
            vec![StateKind::SingletGround, StateKind::SingletExcited],
            vec![(0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn two_level_matches_closed_form() {
        let (ge, gs) = (3.0, 5.0);
        let r = two_level(ge, gs);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let ts = [0.0, 0.01, 0.1, 0.5, 2.0, 10.0];
        let xs = integrate_rk4(&r, &x0, &ts, &Rk4Options::default()).unwrap();
        for (t, x) in ts.iter().zip(&xs) {
            let exact = ge / (ge + gs) * (1.0 - (-(ge + gs) * t).exp());
            assert!((x[1] - exact).abs() < 1e-10, "t={t}: {} vs {exact}", x[1]);
            assert!((x.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted_times() {
        let r = two_level(1.0, 1.0);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        assert!(integrate_rk4(&r, &x0, &[1.0, 0.5], &Rk4Options::default()).is_err());
    }

    #[test]
    fn step_underflow_is_reported() {
        let r = two_level(1.0, 1.0);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        let opts = Rk4Options { rtol: 0.0, atol: 0.0, min_step: 1e-3, ..Default::default() };
        assert!(matches!(integrate_rk4(&r, &x0, &[1.0], &opts), Err(Error::Integration(_))));
    }
}
