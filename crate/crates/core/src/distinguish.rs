//! Two-state discrimination: trace distance, the Helstrom test, the
//! square-root Hilbert–Schmidt metric, the pinching inequality and the
//! quantum hypothesis-testing bound on `Tr W_{x'} Pi_x`.
//!
//! Logarithms are base 2 everywhere except in [`euclid_sum_check`], whose left
//! side `-ln(1 - T)` is a natural logarithm; the conversion to bits happens in
//! the code-assembly layer.

use serde::{Serialize, Serializer};

use crate::channel::{DensityMatrix, ProductState};
use crate::error::{Error, Result};
use crate::linalg::{hs_distance, ComplexMatrix};
use crate::typicality::{eta, TypicalProjector};

/// Eigenvalues of `rho - sigma` down to `-HELSTROM_KERNEL_TOL` belong to the
/// Helstrom projector.
pub const HELSTROM_KERNEL_TOL: f64 = 1e-12;
/// Trace distances within this of 1 count as perfectly distinguishable.
pub const UNIT_DISTANCE_TOL: f64 = 1e-14;

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// `1/2 || rho - sigma ||_1` of two Hermitian operators, clamped to `[0, 1]`.
pub fn trace_distance_of(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok((0.5 * (rho - sigma).trace_norm()?).clamp(0.0, 1.0))
}

pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_distance_of(rho, sigma)
}

/// Trace distance of two product states via their materialized tensors.
pub fn product_trace_distance(a: &ProductState, b: &ProductState, cap: usize) -> Result<f64> {
    a.check_compatible(b)?;
    trace_distance_of(&a.materialize(cap)?, &b.materialize(cap)?)
}

/// `prod_i Tr(W_i W'_i)`; for pure letters this is `prod_i |<psi_i|phi_i>|^2`.
pub fn overlap_product(a: &ProductState, b: &ProductState) -> Result<f64> {
    a.check_compatible(b)?;
    Ok(a
        .letters()
        .iter()
        .zip(b.letters())
        .map(|(x, y)| x.trace_product(y))
        .product())
}

/// `|| sqrt(rho) - sqrt(sigma) ||_2`
pub fn sqrt_hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(hs_distance(&rho.sqrt(), &sigma.sqrt()))
}

/// The optimal projector for discriminating two equiprobable states.
#[derive(Clone, Debug)]
pub struct HelstromTest {
    /// Projector onto the non-negative eigenspace of `rho - sigma`.
    pub projector: ComplexMatrix,
    /// `1 - 1/2 || rho - sigma ||_1`
    pub epsilon: f64,
    /// `Tr rho (1 - S)`
    pub alpha_err: f64,
    /// `Tr sigma S`
    pub beta_err: f64,
}

pub fn helstrom(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<HelstromTest> {
    check_dims(rho, sigma)?;
    let eig = (rho - sigma).herm_eig()?;
    let d = rho.dim();
    let mut projector = ComplexMatrix::zeros(d);
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda >= -HELSTROM_KERNEL_TOL {
            let v = eig.vector(k);
            for i in 0..d {
                for j in 0..d {
                    projector[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
    }
    let half_norm: f64 = 0.5 * eig.values.iter().map(|x| x.abs()).sum::<f64>();
    let epsilon = (1.0 - half_norm).clamp(0.0, 1.0);
    let alpha_err = (1.0 - rho.trace_product(&projector)).clamp(0.0, 1.0);
    let beta_err = sigma.trace_product(&projector).clamp(0.0, 1.0);
    Ok(HelstromTest {
        projector,
        epsilon,
        alpha_err,
        beta_err,
    })
}

/// `-ln(1 - T)`, which diverges for perfectly distinguishable states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogBound {
    Finite(f64),
    Infinite,
}

impl LogBound {
    pub fn from_trace_distance(t: f64) -> Self {
        if t >= 1.0 - UNIT_DISTANCE_TOL {
            LogBound::Infinite
        } else {
            LogBound::Finite(-(1.0 - t).ln())
        }
    }

    pub fn at_least(&self, x: f64) -> bool {
        match *self {
            LogBound::Finite(v) => v >= x,
            LogBound::Infinite => true,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            LogBound::Finite(v) => Some(v),
            LogBound::Infinite => None,
        }
    }
}

impl Serialize for LogBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            LogBound::Finite(v) => s.serialize_f64(v),
            LogBound::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Both sides of `-ln(1 - T) >= 1/4 sum_i || sqrt(W_i) - sqrt(W'_i) ||_2^2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EuclidCheck {
    pub trace_distance: f64,
    /// Natural-log nats.
    pub lhs: LogBound,
    pub rhs: f64,
}

impl EuclidCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs.at_least(self.rhs - tol)
    }
}

/// `1/4 sum_i || sqrt(W_i) - sqrt(W'_i) ||_2^2` computed letterwise.
pub fn letterwise_sqrt_sum(a: &ProductState, b: &ProductState) -> Result<f64> {
    a.check_compatible(b)?;
    let mut acc = 0.0;
    for (x, y) in a.letters().iter().zip(b.letters()) {
        acc += sqrt_hs_distance(x, y)?.powi(2);
    }
    Ok(0.25 * acc)
}

pub fn euclid_sum_check(a: &ProductState, b: &ProductState, cap: usize) -> Result<EuclidCheck> {
    let rhs = letterwise_sqrt_sum(a, b)?;
    let t = product_trace_distance(a, b, cap)?;
    Ok(EuclidCheck {
        trace_distance: t,
        lhs: LogBound::from_trace_distance(t),
        rhs,
    })
}

/// Minimum eigenvalue of `2 S Pi S + 2 (1-S) Pi (1-S) - Pi`.
pub fn pinching_check(pi: &ComplexMatrix, s: &ComplexMatrix) -> Result<f64> {
    check_dims(pi, s)?;
    let comp = &ComplexMatrix::identity(s.dim()) - s;
    let a = &(s * pi) * s;
    let b = &(&comp * pi) * &comp;
    let m = &(&a.scale(2.0) + &b.scale(2.0)) - pi;
    m.min_eig()
}

/// `eta + 2 eps (1 + 2^{2 delta sqrt(n) + S_x - S_x'})`.
pub fn lemma2_rhs(epsilon: f64, delta: f64, n: usize, s_x: f64, s_xp: f64, d: usize) -> f64 {
    let exponent = 2.0 * delta * (n as f64).sqrt() + s_x - s_xp;
    eta(delta, d) + 2.0 * epsilon * (1.0 + exponent.exp2())
}

/// One evaluation of the hypothesis-testing bound on a word pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Lemma2Check {
    pub epsilon: f64,
    pub delta: f64,
    /// `Tr W_{x'} Pi_x`
    pub lhs: f64,
    pub rhs: f64,
}

impl Lemma2Check {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Evaluates the bound with the exact `epsilon = 1 - T(W_x, W_x')`.
pub fn lemma2_check(pi_x: &TypicalProjector, other: &ProductState, cap: usize) -> Result<Lemma2Check> {
    let x = pi_x.state();
    let t = product_trace_distance(x, other, cap)?;
    let epsilon = 1.0 - t;
    let lhs = pi_x.cross_mass(other)?;
    let rhs = lemma2_rhs(epsilon, pi_x.delta(), x.len(), x.entropy(), other.entropy(), x.letter_dim());
    Ok(Lemma2Check {
        epsilon,
        delta: pi_x.delta(),
        lhs,
        rhs,
    })
}
