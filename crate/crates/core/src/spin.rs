//! Spin Hamiltonians with zero-field splitting for S = 1/2, 1 and 3/2.
//!
//! Energies are expressed in the same unit as `D` (pass `D = 1` to work in
//! units of `D`). Fields are reduced: `b = g μ_B B / |D|`, so the Zeeman
//! energy of a reduced component `b_k` is `b_k |D|`.
//!
//! Basis conventions:
//!
//! * triplet: the zero-field eigenbasis `{|s_x⟩, |s_y⟩, |s_z⟩}`, in which the
//!   Zeeman term puts `B_x` on the (y,z) element, `B_y` on (x,z) and `i B_z` on
//!   (x,y);
//! * quartet and doublet: `S_x` eigenstates ordered by descending `m_s`
//!   (`3/2, 1/2, -1/2, -3/2` for the quartet).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{bohr_mhz_per_gauss, G_FACTOR};
use crate::error::{ensure_finite, invalid, Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Zero-field splitting parameters `D` and `E`, in any common energy unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroFieldSplitting {
    pub d: f64,
    pub e: f64,
}

impl ZeroFieldSplitting {
    pub fn new(d: f64, e: f64) -> Result<Self> {
        ensure_finite("D", d)?;
        ensure_finite("E", e)?;
        Ok(Self { d, e })
    }

    /// `D = 1` with the given `E/D`; the natural choice for simulations.
    pub fn from_ratio(e_over_d: f64) -> Result<Self> {
        Self::new(1.0, e_over_d)
    }

    pub fn e_over_d(&self) -> f64 {
        self.e / self.d
    }

    fn require_nonzero_d(&self) -> Result<()> {
        if self.d == 0.0 {
            return Err(invalid("D must be nonzero for S >= 1 Hamiltonians"));
        }
        Ok(())
    }
}

/// Magnetic field in reduced units `g μ_B B / |D|`, defect frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl FieldVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn cartesian(bx: f64, by: f64, bz: f64) -> Result<Self> {
        ensure_finite("bx", bx)?;
        ensure_finite("by", by)?;
        ensure_finite("bz", bz)?;
        Ok(Self { bx, by, bz })
    }

    /// In-plane field of magnitude `b` at angle `phi` (radians) from x.
    pub fn in_plane(b: f64, phi: f64) -> Result<Self> {
        Self::new(b, phi, 0.0)
    }

    /// In-plane magnitude `b` at angle `phi`, plus a reduced out-of-plane
    /// component `bz`.
    pub fn new(b: f64, phi: f64, bz: f64) -> Result<Self> {
        ensure_finite("b", b)?;
        ensure_finite("phi", phi)?;
        if b < 0.0 {
            return Err(invalid(format!("field magnitude must be >= 0, got {b}")));
        }
        Self::cartesian(b * phi.cos(), b * phi.sin(), bz)
    }

    pub fn along_z(bz: f64) -> Result<Self> {
        Self::cartesian(0.0, 0.0, bz)
    }

    /// Builds the reduced field from a lab field in gauss.
    pub fn from_gauss(field_gauss: [f64; 3], g: f64, d_mhz: f64) -> Result<Self> {
        ensure_finite("g", g)?;
        ensure_finite("D", d_mhz)?;
        if d_mhz == 0.0 || g <= 0.0 {
            return Err(invalid("gauss conversion needs g > 0 and D != 0"));
        }
        let scale = g * bohr_mhz_per_gauss() / d_mhz.abs();
        Self::cartesian(field_gauss[0] * scale, field_gauss[1] * scale, field_gauss[2] * scale)
    }

    /// [`FieldVector::from_gauss`] with the default `g = 2`.
    pub fn from_gauss_default_g(field_gauss: [f64; 3], d_mhz: f64) -> Result<Self> {
        Self::from_gauss(field_gauss, G_FACTOR, d_mhz)
    }

    pub fn to_gauss(&self, g: f64, d_mhz: f64) -> [f64; 3] {
        let scale = d_mhz.abs() / (g * bohr_mhz_per_gauss());
        [self.bx * scale, self.by * scale, self.bz * scale]
    }

    pub fn magnitude(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }

    pub fn in_plane_magnitude(&self) -> f64 {
        self.bx.hypot(self.by)
    }

    pub fn phi(&self) -> f64 {
        self.by.atan2(self.bx)
    }
}

/// A dense complex matrix that has been checked to be Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let dev = hermitian_deviation(&m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }
}

impl std::ops::Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// S = 1 Hamiltonian in the `{|s_x⟩, |s_y⟩, |s_z⟩}` basis.
pub fn triplet_hamiltonian(zfs: &ZeroFieldSplitting, field: &FieldVector) -> Result<HermitianMatrix> {
    zfs.require_nonzero_d()?;
    let (d, e) = (zfs.d, zfs.e);
    let scale = d.abs();
    let (bx, by, bz) = (field.bx * scale, field.by * scale, field.bz * scale);
    let mut h = DMatrix::from_element(3, 3, c(0.0, 0.0));
    h[(0, 0)] = c(-2.0 * d / 3.0, 0.0);
    h[(1, 1)] = c(d / 3.0 - e, 0.0);
    h[(2, 2)] = c(d / 3.0 + e, 0.0);
    h[(0, 1)] = c(0.0, bz);
    h[(1, 0)] = c(0.0, -bz);
    h[(0, 2)] = c(by, 0.0);
    h[(2, 0)] = c(by, 0.0);
    h[(1, 2)] = c(bx, 0.0);
    h[(2, 1)] = c(bx, 0.0);
    HermitianMatrix::new(h)
}

/// S = 3/2 Hamiltonian in the `S_x` basis `m_s = 3/2, 1/2, -1/2, -3/2`.
pub fn quartet_hamiltonian(zfs: &ZeroFieldSplitting, field: &FieldVector) -> Result<HermitianMatrix> {
    zfs.require_nonzero_d()?;
    let (d, e) = (zfs.d, zfs.e);
    let scale = d.abs();
    let mut h = DMatrix::from_element(4, 4, c(0.0, 0.0));
    let diag = [d, -d, -d, d];
    for (k, v) in diag.iter().enumerate() {
        h[(k, k)] = c(*v, 0.0);
    }
    let r3e = 3f64.sqrt() * e;
    for (i, j) in [(0, 2), (1, 3)] {
        h[(i, j)] = c(r3e, 0.0);
        h[(j, i)] = c(r3e, 0.0);
    }
    add_spin_zeeman(&mut h, 1.5, [field.bx * scale, field.by * scale, field.bz * scale]);
    HermitianMatrix::new(h)
}

/// S = 1/2 Hamiltonian (pure Zeeman) in the `S_x` basis `m_s = 1/2, -1/2`.
///
/// Energies are in units of the reduced field (take `|D| = 1`).
pub fn doublet_hamiltonian(field: &FieldVector) -> Result<HermitianMatrix> {
    let mut h = DMatrix::from_element(2, 2, c(0.0, 0.0));
    add_spin_zeeman(&mut h, 0.5, [field.bx, field.by, field.bz]);
    HermitianMatrix::new(h)
}

/// Adds `B · S` for spin `s` quantized along x. In that frame `S_y` and `S_z`
/// play the roles of the ladder combinations `S_x'` and `S_y'`.
fn add_spin_zeeman(h: &mut DMatrix<Complex64>, s: f64, b: [f64; 3]) {
    let dim = h.nrows();
    for k in 0..dim {
        let m = s - k as f64;
        h[(k, k)] += c(b[0] * m, 0.0);
    }
    for k in 0..dim - 1 {
        // ⟨m|S_+|m-1⟩ with m = s - k
        let m = s - k as f64;
        let ladder = (s * (s + 1.0) - m * (m - 1.0)).sqrt();
        let re = 0.5 * ladder * b[1];
        let im = -0.5 * ladder * b[2];
        h[(k, k + 1)] += c(re, im);
        h[(k + 1, k)] += c(re, -im);
    }
}

/// Eigenvalues, eigenvectors, and projections onto the zero-field basis.
#[derive(Debug, Clone)]
pub struct SpinEigensystem {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    projections: DMatrix<f64>,
}

impl SpinEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `i` is the eigenvector for `eigenvalues()[i]`.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// `projections()[(mu, i)] = |⟨basis_mu | state_i⟩|²`.
    pub fn projections(&self) -> &DMatrix<f64> {
        &self.projections
    }

    pub fn projection(&self, basis: usize, state: usize) -> f64 {
        self.projections[(basis, state)]
    }

    /// The zero-field eigensystem of a triplet: identity projections.
    pub fn identity(dim: usize) -> Self {
        Self {
            eigenvalues: vec![0.0; dim],
            eigenvectors: DMatrix::identity(dim, dim),
            projections: DMatrix::identity(dim, dim),
        }
    }
}

/// Diagonalizes a small Hermitian matrix with cyclic complex Jacobi sweeps.
///
/// Degenerate subspaces are canonicalized: the zero-field basis vectors are
/// projected into the subspace in order and Gram-Schmidt orthonormalized,
/// then each vector is phase-fixed so its largest component is real and
/// positive. Ties in energy are ordered by descending `s_x` then `s_y`
/// weight.
pub fn eigensystem(h: &HermitianMatrix) -> Result<SpinEigensystem> {
    let n = h.dim();
    let m = h.matrix();
    let norm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let (values, mut vectors) = jacobi_hermitian(m)?;

    let degeneracy_tol = 1e-9 * norm.max(1e-300);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    vectors = DMatrix::from_fn(n, n, |r, col| vectors[(r, order[col])]);

    // Canonicalize each cluster of (near-)degenerate eigenvalues.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= degeneracy_tol {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_subspace(&mut vectors, start, end);
        }
        start = end;
    }
    for col in 0..n {
        fix_phase(&mut vectors, col);
    }

    let projections = vectors.map(|z| z.norm_sqr());

    // Stable tie-break within degenerate groups.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        let same = (values[a] - values[b]).abs() <= degeneracy_tol;
        if !same {
            return values[a].total_cmp(&values[b]);
        }
        projections[(0, b)]
            .total_cmp(&projections[(0, a)])
            .then(projections[(1.min(n - 1), b)].total_cmp(&projections[(1.min(n - 1), a)]))
    });
    let eigenvalues = idx.iter().map(|&i| values[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, col| vectors[(r, idx[col])]);
    let projections = DMatrix::from_fn(n, n, |r, col| projections[(r, idx[col])]);

    Ok(SpinEigensystem { eigenvalues, eigenvectors, projections })
}

/// Raw Jacobi diagonalization; returns unsorted eigenvalues and vectors.
fn jacobi_hermitian(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let total = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if total == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= 1e-32 * total {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // U = diag(1, e^{-iα}) · [[c, s], [-s, c]] on the (p, q) plane
                let phase = apq / mag;
                let theta = 0.5 * (2.0 * mag).atan2(aqq - app);
                let (s, cs) = theta.sin_cos();
                let up_p = Complex64::new(cs, 0.0);
                let up_q = Complex64::new(s, 0.0);
                let uq_p = -phase.conj() * s;
                let uq_q = phase.conj() * cs;
                // A <- A U (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * up_p + akq * uq_p;
                    a[(k, q)] = akp * up_q + akq * uq_q;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * up_p + vkq * uq_p;
                    v[(k, q)] = vkp * up_q + vkq * uq_q;
                }
                // A <- U† A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = up_p.conj() * apk + uq_p.conj() * aqk;
                    a[(q, k)] = up_q.conj() * apk + uq_q.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Err(Error::Integration("Jacobi sweeps did not converge".into()))
}

fn canonicalize_subspace(v: &mut DMatrix<Complex64>, start: usize, end: usize) {
    let n = v.nrows();
    let k = end - start;
    let span: Vec<Vec<Complex64>> = (start..end).map(|col| (0..n).map(|r| v[(r, col)]).collect()).collect();
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    for basis in 0..n {
        if out.len() == k {
            break;
        }
        // Projector onto the subspace applied to e_basis.
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        for s in &span {
            let coeff = s[basis].conj();
            for r in 0..n {
                w[r] += s[r] * coeff;
            }
        }
        for o in &out {
            let dot: Complex64 = (0..n).map(|r| o[r].conj() * w[r]).sum();
            for r in 0..n {
                w[r] -= o[r] * dot;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            out.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    for (j, vec) in out.into_iter().enumerate() {
        for r in 0..n {
            v[(r, start + j)] = vec[r];
        }
    }
}

fn fix_phase(v: &mut DMatrix<Complex64>, col: usize) {
    let n = v.nrows();
    let mut best = 0;
    for r in 1..n {
        if v[(r, col)].norm() > v[(best, col)].norm() + 1e-12 {
            best = r;
        }
    }
    let pivot = v[(best, col)];
    if pivot.norm() == 0.0 {
        return;
    }
    let rot = pivot.conj() / pivot.norm();
    for r in 0..n {
        v[(r, col)] *= rot;
    }
    v[(best, col)] = Complex64::new(v[(best, col)].norm(), 0.0);
}
