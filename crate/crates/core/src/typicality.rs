//! Entropy typical projectors of product states.
//!
//! The projector of `W = W_1 (x) ... (x) W_n` is spanned by the product
//! eigenvectors `|e_{k_1}> (x) ... (x) |e_{k_n}>` whose surprisal
//! `-sum_i log2 lambda_{k_i}` falls in `[S - delta sqrt(n), S + delta sqrt(n)]`.
//! It is represented implicitly by the list of typical multi-indices, so masses
//! and cross-masses never need the `d^n`-dimensional matrices.

use crate::channel::{ProductState, ZERO_EIGENVALUE};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Largest `d^n` the enumeration will walk.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;
/// Symmetric slack on the window boundaries.
pub const WINDOW_SLACK: f64 = 1e-12;

/// `K(d) = (log2 max{d, 3})^2`.
pub fn k_constant(d: usize) -> f64 {
    (d.max(3) as f64).log2().powi(2)
}

/// `eta = 2 * 2^{-delta^2 / (36 K(d))}`.
pub fn eta(delta: f64, d: usize) -> f64 {
    2.0 * (-delta * delta / (36.0 * k_constant(d))).exp2()
}

/// Largest admissible `delta`, `sqrt(n) log2 d`.
pub fn max_delta(n: usize, d: usize) -> f64 {
    (n as f64).sqrt() * (d as f64).log2()
}

#[derive(Clone, Debug)]
pub struct TypicalProjector {
    state: ProductState,
    delta: f64,
    window: (f64, f64),
    /// `-log2 lambda_k` per letter; `+inf` for zero eigenvalues.
    surprisal: Vec<Vec<f64>>,
    /// Typical multi-indices, flattened with letter 0 most significant.
    members: Vec<u64>,
}

pub fn typical_projector(state: &ProductState, delta: f64) -> Result<TypicalProjector> {
    typical_projector_capped(state, delta, DEFAULT_ENUMERATION_CAP)
}

pub fn typical_projector_capped(state: &ProductState, delta: f64, cap: u128) -> Result<TypicalProjector> {
    let n = state.len();
    let d = state.letter_dim();
    let dmax = max_delta(n, d);
    if !(delta > 0.0 && delta <= dmax + WINDOW_SLACK) {
        return Err(Error::InvalidParameter(format!(
            "delta {delta} outside (0, {dmax}] for n = {n}, d = {d}"
        )));
    }
    let total = state.total_dim();
    if total > cap {
        return Err(Error::CapExceeded { requested: total, cap });
    }

    let surprisal: Vec<Vec<f64>> = state
        .eigs()
        .iter()
        .map(|e| {
            e.values
                .iter()
                .map(|&l| if l > ZERO_EIGENVALUE { -l.log2() } else { f64::INFINITY })
                .collect()
        })
        .collect();
    let half_width = delta * (n as f64).sqrt();
    let s = state.entropy();
    let window = (s - half_width, s + half_width);

    // Suffix bounds of achievable finite surprisal, for pruning.
    let mut suffix_min = vec![0.0; n + 1];
    let mut suffix_max = vec![0.0; n + 1];
    for i in (0..n).rev() {
        let finite = surprisal[i].iter().copied().filter(|x| x.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        suffix_min[i] = suffix_min[i + 1] + lo;
        suffix_max[i] = suffix_max[i + 1] + hi;
    }

    let mut members = Vec::new();
    let ctx = Walk {
        surprisal: &surprisal,
        suffix_min: &suffix_min,
        suffix_max: &suffix_max,
        lo: window.0 - WINDOW_SLACK,
        hi: window.1 + WINDOW_SLACK,
        d: d as u64,
    };
    ctx.walk(0, 0.0, 0, &mut members);

    Ok(TypicalProjector {
        state: state.clone(),
        delta,
        window,
        surprisal,
        members,
    })
}

struct Walk<'a> {
    surprisal: &'a [Vec<f64>],
    suffix_min: &'a [f64],
    suffix_max: &'a [f64],
    lo: f64,
    hi: f64,
    d: u64,
}

impl Walk<'_> {
    fn walk(&self, letter: usize, partial: f64, prefix: u64, out: &mut Vec<u64>) {
        let n = self.surprisal.len();
        if letter == n {
            if partial >= self.lo && partial <= self.hi {
                out.push(prefix);
            }
            return;
        }
        if partial + self.suffix_min[letter] > self.hi || partial + self.suffix_max[letter] < self.lo {
            return;
        }
        for (k, &s) in self.surprisal[letter].iter().enumerate() {
            if s.is_finite() {
                self.walk(letter + 1, partial + s, prefix * self.d + k as u64, out);
            }
        }
    }
}

impl TypicalProjector {
    pub fn state(&self) -> &ProductState {
        &self.state
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn entropy(&self) -> f64 {
        self.state.entropy()
    }

    /// `[S - delta sqrt(n), S + delta sqrt(n)]`
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn rank(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    /// Per-letter eigen-indices of a flattened member.
    pub fn digits(&self, flat: u64) -> Vec<usize> {
        let n = self.state.len();
        let d = self.state.letter_dim() as u64;
        let mut out = vec![0; n];
        let mut x = flat;
        for i in (0..n).rev() {
            out[i] = (x % d) as usize;
            x /= d;
        }
        out
    }

    /// Surprisal `-log2` of the product eigenvalue of a member.
    pub fn member_surprisal(&self, flat: u64) -> f64 {
        self.digits(flat)
            .iter()
            .enumerate()
            .map(|(i, &k)| self.surprisal[i][k])
            .sum()
    }

    /// `sum_{k in T} prod_i table[i][k_i]`, in member order.
    fn weighted_sum(&self, tables: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for &m in &self.members {
            acc += self
                .digits(m)
                .iter()
                .enumerate()
                .map(|(i, &k)| tables[i][k])
                .product::<f64>();
        }
        acc
    }

    /// `Tr W Pi`
    pub fn typ_mass(&self) -> f64 {
        let tables: Vec<Vec<f64>> = self.state.eigs().iter().map(|e| e.values.clone()).collect();
        self.weighted_sum(&tables).clamp(0.0, 1.0)
    }

    /// `Tr W' Pi` for another product state of the same shape.
    pub fn cross_mass(&self, other: &ProductState) -> Result<f64> {
        self.state.check_compatible(other)?;
        let tables: Vec<Vec<f64>> = self
            .state
            .eigs()
            .iter()
            .zip(other.letters())
            .map(|(e, w)| (0..e.dim()).map(|k| w.expectation(&e.vector(k))).collect())
            .collect();
        Ok(self.weighted_sum(&tables).clamp(0.0, 1.0))
    }

    /// Product eigenvector `|e_{k_1}> (x) ... (x) |e_{k_n}>`.
    pub fn basis_vector(&self, flat: u64) -> Vec<C64> {
        let mut v = vec![C64::new(1.0, 0.0)];
        for (i, k) in self.digits(flat).into_iter().enumerate() {
            let e = self.state.eigs()[i].vector(k);
            v = v.iter().flat_map(|a| e.iter().map(move |b| a * b)).collect();
        }
        v
    }

    /// The projector as a `d^n x d^n` matrix.
    pub fn materialize(&self, cap: usize) -> Result<ComplexMatrix> {
        let total = self.state.total_dim();
        if total > cap as u128 {
            return Err(Error::CapExceeded {
                requested: total,
                cap: cap as u128,
            });
        }
        let dim = total as usize;
        let mut p = ComplexMatrix::zeros(dim);
        for &m in &self.members {
            let v = self.basis_vector(m);
            for i in 0..dim {
                if v[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Ok(p)
    }

    /// `Pi W Pi`, materialized.
    pub fn truncated_state(&self, cap: usize) -> Result<ComplexMatrix> {
        let p = self.materialize(cap)?;
        let w = self.state.materialize(cap)?;
        Ok(&(&p * &w) * &p)
    }

    /// Whether every typical product eigenvalue lies in
    /// `[2^{-S - delta sqrt n}, 2^{-S + delta sqrt n}]` (compared on logs).
    pub fn eigenvalue_sandwich_holds(&self, slack: f64) -> bool {
        self.members.iter().all(|&m| {
            let s = self.member_surprisal(m);
            s >= self.window.0 - slack && s <= self.window.1 + slack
        })
    }
}
