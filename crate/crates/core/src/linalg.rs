//! Dense complex linear algebra for small Hermitian operators.
//!
//! Everything here works on square row-major matrices of `Complex64`. The
//! eigensolver is a cyclic complex Jacobi iteration: each rotation is a phase
//! change that makes the pivot real followed by an ordinary real Givens
//! rotation, so Hermiticity is preserved exactly by construction.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest matrix dimension `kron` and the materializers will build.
pub const DEFAULT_DIM_CAP: usize = 4096;
/// Tolerance for Hermiticity, trace normalization and PSD checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Negative eigenvalues down to this are treated as roundoff and clamped.
pub const PSD_CLAMP_TOL: f64 = 1e-10;
/// Below this an eigenvalue is evidence of genuinely non-PSD input.
pub const PSD_ERROR_TOL: f64 = 1e-8;
/// Eigenvalues at or below this (relative to the spectral radius, or 1) are
/// rounding noise and map to zero under the square root.
pub const SQRT_FLOOR: f64 = 1e-15;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(dim, row.len()));
            }
            data.extend(row);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Schatten-2 (Hilbert–Schmidt / Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|H - H^†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Re <v|A|v>.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let n = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let av: C64 = row.iter().zip(v).map(|(a, x)| a * x).sum();
            acc += v[i].conj() * av;
        }
        acc.re
    }

    /// Real part of `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] * other[(j, i)]).re;
            }
        }
        acc
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        self.kron_capped(other, DEFAULT_DIM_CAP)
    }

    pub fn kron_capped(&self, other: &Self, cap: usize) -> Result<Self> {
        let dim = self.dim as u128 * other.dim as u128;
        if dim > cap as u128 {
            return Err(Error::CapExceeded {
                requested: dim,
                cap: cap as u128,
            });
        }
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut out = Self::zeros(dim);
        for i1 in 0..da {
            for j1 in 0..da {
                let a = self[(i1, j1)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for i2 in 0..db {
                    let row = (i1 * db + i2) * dim + j1 * db;
                    for j2 in 0..db {
                        out.data[row + j2] = a * other[(i2, j2)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Tensor product of a sequence of factors, left to right.
    pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>, cap: usize) -> Result<Self> {
        let mut acc = ComplexMatrix::identity(1);
        for f in factors {
            acc = acc.kron_capped(f, cap)?;
        }
        Ok(acc)
    }

    pub fn herm_eig(&self) -> Result<HermitianEig> {
        self.check_hermitian()?;
        let (values, basis) = jacobi(self, true);
        Ok(HermitianEig {
            values,
            basis: basis.expect("vectors requested"),
        })
    }

    /// Eigenvalues only, ascending. Skips the eigenvector accumulation.
    pub fn herm_eigvals(&self) -> Result<Vec<f64>> {
        self.check_hermitian()?;
        Ok(jacobi(self, false).0)
    }

    pub fn min_eig(&self) -> Result<f64> {
        Ok(self.herm_eigvals()?[0])
    }

    /// Sum of absolute eigenvalues of a Hermitian matrix.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.herm_eigvals()?.iter().map(|x| x.abs()).sum())
    }

    /// Positive square root of a PSD matrix. Eigenvalues in
    /// `[-PSD_ERROR_TOL, 0)` are clamped to zero.
    pub fn mat_sqrt(&self) -> Result<Self> {
        let eig = self.herm_eig()?;
        if eig.values[0] < -PSD_ERROR_TOL {
            return Err(Error::NotPsd(eig.values[0]));
        }
        let floor = SQRT_FLOOR * eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        Ok(eig.map_values(|x| if x <= floor { 0.0 } else { x.sqrt() }))
    }

    fn check_hermitian(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(())
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// `|| A - B ||_2` without allocating the difference.
pub fn hs_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.dim, b.dim, "dimension mismatch");
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Spectral decomposition `H = V diag(values) V^†`.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors.
    pub basis: ComplexMatrix,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.basis.dim).map(|i| self.basis[(i, k)]).collect()
    }

    /// `V f(diag) V^†`
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.basis;
        let mut out = ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)].conj()).sum()
        });
        // Exact Hermiticity of the output.
        for i in 0..n {
            out[(i, i)].im = 0.0;
            for j in i + 1..n {
                let z = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }
}

fn off_diagonal_norm(a: &[C64], n: usize, ld: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += 2.0 * a[i * ld + j].norm_sqr();
        }
    }
    acc.sqrt()
}

fn jacobi(h: &ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = h.dim;
    // Symmetrize so that the iteration sees an exactly Hermitian matrix.
    // Padded row stride: power-of-two strides alias in cache on the column writes.
    let ld = n + 1;
    let mut a = vec![C64::new(0.0, 0.0); n * ld];
    for i in 0..n {
        a[i * ld + i] = C64::new(h[(i, i)].re, 0.0);
        for j in i + 1..n {
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            a[i * ld + j] = z;
            a[j * ld + i] = z.conj();
        }
    }
    // Eigenvectors accumulate as rows of `vt`, so column updates of V are contiguous.
    let mut vt = want_vectors.then(|| {
        let mut m = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            m[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    });
    let scale = h.hs_norm();

    for sweep in 0..JACOBI_MAX_SWEEPS {
        // Rows above the pivot row are not read again within a sweep, so their
        // copies of rotated columns are refreshed here instead of per rotation.
        for i in 0..n {
            for j in i + 1..n {
                a[i * ld + j] = a[j * ld + i].conj();
            }
        }
        if off_diagonal_norm(&a, n, ld) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * ld + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * ld + p].re;
                let aqq = a[q * ld + q].re;
                let g = 100.0 * r;
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[p * ld + q] = C64::new(0.0, 0.0);
                    a[q * ld + p] = C64::new(0.0, 0.0);
                    continue;
                }
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // e^{-i phi} where a_pq = r e^{i phi}
                let ph = apq.conj() / r;
                let sph = ph * s;
                let cph = ph * c;
                // Rows p and q hold the conjugates of columns p and q.
                let (head, tail) = a.split_at_mut(q * ld);
                let row_p = &mut head[p * ld..p * ld + n];
                let row_q = &mut tail[..n];
                // The pivot entries are overwritten below, so no branch is needed here.
                let (sc, cc) = (sph.conj(), cph.conj());
                for (x, y) in row_p.iter_mut().zip(row_q.iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = xp * c - xq * sc;
                    *y = xp * s + xq * cc;
                }
                for k in p + 1..n {
                    a[k * ld + p] = a[p * ld + k].conj();
                    a[k * ld + q] = a[q * ld + k].conj();
                }
                a[p * ld + p] = C64::new(app - t * r, 0.0);
                a[q * ld + q] = C64::new(aqq + t * r, 0.0);
                a[p * ld + q] = C64::new(0.0, 0.0);
                a[q * ld + p] = C64::new(0.0, 0.0);
                if let Some(vt) = vt.as_mut() {
                    let (head, tail) = vt.split_at_mut(q * n);
                    let vp = &mut head[p * n..(p + 1) * n];
                    let vq = &mut tail[..n];
                    for k in 0..n {
                        let (x, y) = (vp[k], vq[k]);
                        vp[k] = x * c - y * sph;
                        vq[k] = x * s + y * cph;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * ld + i].re.total_cmp(&a[j * ld + j].re));
    let values: Vec<f64> = order.iter().map(|&i| a[i * ld + i].re).collect();
    let basis = vt.map(|vt| {
        let mut b = ComplexMatrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            let v = &vt[src * n..(src + 1) * n];
            // Phase convention: first non-negligible component real positive.
            let lead = v.iter().copied().find(|z| z.norm() > 1e-12).unwrap_or(C64::new(1.0, 0.0));
            let fix = lead.conj() / lead.norm();
            for k in 0..n {
                b[(k, col)] = v[k] * fix;
            }
        }
        b
    });
    (values, basis)
}
