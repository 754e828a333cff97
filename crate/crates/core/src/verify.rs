//! Exact error measurement for identification codes, checks of the claimed
//! error bounds, and rate accounting against the dimension estimates.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::channel::{CqChannel, DensityMatrix};
use crate::codes::{pure_lambda2_bound, Decoder, DiCode, Words, MAX_CERTIFIED_SCAN};
use crate::distinguish::{lemma2_rhs, sqrt_hs_distance};
use crate::error::{Error, Result};
use crate::geometry::DimensionEstimate;
use crate::typicality::{eta, typical_projector_capped, DEFAULT_ENUMERATION_CAP};

/// Cross-trace matrices are attached for codes up to this size.
pub const CROSS_MATRIX_LIMIT: usize = 32;
/// Pure codes up to this size are scanned pair by pair.
pub const BRUTE_FORCE_LIMIT: usize = 30_000;
/// Dense index tables are used for word spaces up to this size.
const DENSE_LOOKUP_LIMIT: u128 = 1 << 24;
const PURITY_TOL: f64 = 1e-10;
/// Pruning keeps branches within this relative factor of the incumbent.
const PRUNE_SLACK: f64 = 1e-12;
pub const LAMBDA1_PURE_TOL: f64 = 1e-12;
pub const LAMBDA2_PURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub codewords: usize,
    /// `max_j (1 - Tr W_{u_j} E_j)`
    pub lambda1: f64,
    pub lambda1_argmax: Option<usize>,
    /// `max_{j != k} Tr W_{u_k} E_j`, 0 for a single codeword.
    pub lambda2: f64,
    /// `(j, k)` attaining `lambda2`, smallest in lexicographic order.
    pub lambda2_argmax: Option<(usize, usize)>,
    /// `cross[j][k] = Tr W_{u_k} E_j` for small codes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross: Option<Vec<Vec<f64>>>,
}

fn check_channel(code: &DiCode, channel: &CqChannel) -> Result<()> {
    if channel.spec() != code.channel {
        return Err(Error::DecoderMismatch("code was built for a different channel".into()));
    }
    Ok(())
}

fn better(value: f64, pair: (usize, usize), best: f64, arg: Option<(usize, usize)>) -> bool {
    value > best || (value == best && arg.is_none_or(|a| pair < a))
}

/// Exact `lambda1` and `lambda2` of a code.
pub fn measure_errors(code: &DiCode, channel: &CqChannel) -> Result<ErrorReport> {
    measure_errors_capped(code, channel, DEFAULT_ENUMERATION_CAP)
}

pub fn measure_errors_capped(code: &DiCode, channel: &CqChannel, cap: u128) -> Result<ErrorReport> {
    check_channel(code, channel)?;
    if code.is_empty() {
        return Err(Error::InvalidParameter("code has no codewords".into()));
    }
    match code.decoder {
        Decoder::PureProjector => measure_pure(code, channel),
        Decoder::TypicalProjector { delta } => measure_typical(code, channel, delta, cap),
    }
}

/// Symmetric table of `Tr(W_a W_b)` over the alphabet.
fn overlap_table(states: &[DensityMatrix]) -> Vec<Vec<f64>> {
    let q = states.len();
    let mut f = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in a..q {
            let v = states[a].trace_product(&states[b]);
            f[a][b] = v;
            f[b][a] = v;
        }
    }
    f
}

fn overlap_product(f: &[Vec<f64>], u: &[u16], v: &[u16]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| f[a as usize][b as usize]).product()
}

fn measure_pure(code: &DiCode, channel: &CqChannel) -> Result<ErrorReport> {
    let states = code.letter_states(channel)?;
    if let Some(a) = states.iter().position(|s| (s.purity() - 1.0).abs() > PURITY_TOL) {
        return Err(Error::DecoderMismatch(format!("alphabet letter {a} has a mixed output")));
    }
    let f = overlap_table(&states);
    let words = &code.codewords;
    let big_n = words.len();

    let mut lambda1 = f64::NEG_INFINITY;
    let mut lambda1_argmax = None;
    for (j, u) in words.iter().enumerate() {
        let v = (1.0 - overlap_product(&f, u, u)).max(0.0);
        if v > lambda1 {
            lambda1 = v;
            lambda1_argmax = Some(j);
        }
    }

    let (lambda2, lambda2_argmax) = if big_n < 2 {
        (0.0, None)
    } else if big_n <= BRUTE_FORCE_LIMIT {
        pure_lambda2_scan(words, &f)
    } else {
        pure_lambda2_search(words, code.alphabet.len(), &f)
    };
    let cross = (big_n <= CROSS_MATRIX_LIMIT).then(|| {
        (0..big_n)
            .map(|j| (0..big_n).map(|k| overlap_product(&f, words.get(j), words.get(k))).collect())
            .collect()
    });
    Ok(ErrorReport {
        codewords: big_n,
        lambda1,
        lambda1_argmax,
        lambda2,
        lambda2_argmax,
        cross,
    })
}

fn diag_max(f: &[Vec<f64>]) -> f64 {
    (0..f.len()).map(|a| f[a][a]).fold(1.0, f64::max)
}

/// All pairs `j < k`; the overlap product is symmetric, so `(j, k)` is the
/// lexicographically smaller of the two ordered pairs.
fn pure_lambda2_scan(words: &Words, f: &[Vec<f64>]) -> (f64, Option<(usize, usize)>) {
    let n = words.word_len();
    let dmax = diag_max(f);
    // dmax^{n-i}: bound on the factors still to come after position i.
    let tail: Vec<f64> = (0..=n).map(|i| dmax.powi((n - i) as i32)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for j in 0..words.len() {
        let u = words.get(j);
        'pairs: for k in j + 1..words.len() {
            let v = words.get(k);
            let mut p = 1.0;
            for i in 0..n {
                p *= f[u[i] as usize][v[i] as usize];
                if p * tail[i + 1] < best * (1.0 - PRUNE_SLACK) {
                    continue 'pairs;
                }
            }
            if better(p, (j, k), best, arg) {
                best = p;
                arg = Some((j, k));
            }
        }
    }
    (best, arg)
}

enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl Lookup {
    fn build(words: &Words, q: usize) -> Self {
        let n = words.word_len();
        let total = (q as u128).checked_pow(n as u32);
        let index = |w: &[u16]| w.iter().fold(0u64, |acc, &a| acc * q as u64 + a as u64);
        match total {
            Some(total) if total <= DENSE_LOOKUP_LIMIT => {
                let mut table = vec![u32::MAX; total as usize];
                for (j, w) in words.iter().enumerate() {
                    table[index(w) as usize] = j as u32;
                }
                Lookup::Dense(table)
            }
            _ => Lookup::Sparse(words.iter().enumerate().map(|(j, w)| (index(w), j as u32)).collect()),
        }
    }

    fn get(&self, index: u64) -> Option<usize> {
        match self {
            Lookup::Dense(t) => t.get(index as usize).filter(|&&j| j != u32::MAX).map(|&j| j as usize),
            Lookup::Sparse(m) => m.get(&index).map(|&j| j as usize),
        }
    }
}

struct Search<'a> {
    f: &'a [Vec<f64>],
    q: usize,
    n: usize,
    fmax: f64,
    dmax: f64,
    powers: Vec<u64>,
    lookup: Lookup,
    words: &'a Words,
    best: f64,
    arg: Option<(usize, usize)>,
}

impl Search<'_> {
    /// Visits codewords at Hamming distance exactly `h` from word `j`,
    /// pruning branches whose best completion cannot reach the incumbent.
    fn visit(&mut self, j: usize, h: usize) {
        let u = self.words.get(j).to_vec();
        let index = u.iter().fold(0u64, |acc, &a| acc * self.q as u64 + a as u64);
        let ceiling = self.dmax.powi((self.n - h) as i32);
        self.rec(j, &u, 0, h, 1.0, index, ceiling);
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(&mut self, j: usize, u: &[u16], p: usize, left: usize, partial: f64, index: u64, ceiling: f64) {
        if left == 0 {
            if let Some(k) = self.lookup.get(index) {
                if k != j {
                    let v = overlap_product(self.f, u, self.words.get(k));
                    if better(v, (j, k), self.best, self.arg) {
                        self.best = v;
                        self.arg = Some((j, k));
                    }
                }
            }
            return;
        }
        if self.n - p < left {
            return;
        }
        self.rec(j, u, p + 1, left, partial, index, ceiling);
        let a = u[p] as usize;
        for b in 0..self.q {
            if b == a {
                continue;
            }
            let next = partial * self.f[a][b];
            if next * self.fmax.powi(left as i32 - 1) * ceiling < self.best * (1.0 - PRUNE_SLACK) {
                continue;
            }
            let moved = index - a as u64 * self.powers[p] + b as u64 * self.powers[p];
            self.rec(j, u, p + 1, left - 1, next, moved, ceiling);
        }
    }
}

/// Neighbour search by increasing Hamming distance; stops once no pair at a
/// larger distance can beat the incumbent.
fn pure_lambda2_search(words: &Words, q: usize, f: &[Vec<f64>]) -> (f64, Option<(usize, usize)>) {
    let n = words.word_len();
    let mut fmax: f64 = 0.0;
    for a in 0..q {
        for b in 0..q {
            if a != b {
                fmax = fmax.max(f[a][b]);
            }
        }
    }
    let mut powers = vec![1u64; n];
    for i in (0..n.saturating_sub(1)).rev() {
        powers[i] = powers[i + 1] * q as u64;
    }
    let mut s = Search {
        f,
        q,
        n,
        fmax,
        dmax: diag_max(f),
        powers,
        lookup: Lookup::build(words, q),
        words,
        best: f64::NEG_INFINITY,
        arg: None,
    };
    for h in 1..=n {
        if s.fmax.powi(h as i32) * s.dmax.powi((n - h) as i32) < s.best * (1.0 - PRUNE_SLACK) {
            break;
        }
        for j in 0..words.len() {
            s.visit(j, h);
        }
    }
    (s.best.max(0.0), s.arg)
}

fn measure_typical(code: &DiCode, channel: &CqChannel, delta: f64, cap: u128) -> Result<ErrorReport> {
    let states = code.word_states(channel)?;
    let projectors = states
        .iter()
        .map(|w| typical_projector_capped(w, delta, cap))
        .collect::<Result<Vec<_>>>()?;
    let big_n = states.len();
    let mut lambda1 = f64::NEG_INFINITY;
    let mut lambda1_argmax = None;
    let mut lambda2 = if big_n < 2 { 0.0 } else { f64::NEG_INFINITY };
    let mut lambda2_argmax = None;
    let keep_cross = big_n <= CROSS_MATRIX_LIMIT;
    let mut cross = vec![vec![0.0; if keep_cross { big_n } else { 0 }]; if keep_cross { big_n } else { 0 }];
    for (j, pi) in projectors.iter().enumerate() {
        let own = pi.typ_mass();
        let miss = (1.0 - own).max(0.0);
        if miss > lambda1 {
            lambda1 = miss;
            lambda1_argmax = Some(j);
        }
        if keep_cross {
            cross[j][j] = own;
        }
        for (k, w) in states.iter().enumerate() {
            if k == j {
                continue;
            }
            let v = pi.cross_mass(w)?;
            if keep_cross {
                cross[j][k] = v;
            }
            if better(v, (j, k), lambda2, lambda2_argmax) {
                lambda2 = v;
                lambda2_argmax = Some((j, k));
            }
        }
    }
    Ok(ErrorReport {
        codewords: big_n,
        lambda1,
        lambda1_argmax,
        lambda2,
        lambda2_argmax,
        cross: keep_cross.then_some(cross),
    })
}

/// A measured error against its claimed bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub measured: f64,
    pub bound: f64,
    /// `bound - measured`
    pub margin: f64,
    pub vacuous: bool,
    pub pass: bool,
}

impl BoundCheck {
    fn new(measured: f64, bound: f64, tol: f64) -> Self {
        BoundCheck {
            measured,
            bound,
            margin: bound - measured,
            vacuous: bound > 1.0,
            pass: measured <= bound + tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalBoundsCheck {
    pub eta: f64,
    pub lambda1: BoundCheck,
    pub lambda2: BoundCheck,
    pub pass: bool,
}

/// `lambda1 <= eta` and `lambda2 <= eta + 6 * 2^{-delta sqrt(n)}` for a
/// typical-projector code whose separation premise is certified.
pub fn check_thm3(code: &DiCode, report: &ErrorReport, d: usize) -> Result<TypicalBoundsCheck> {
    let Decoder::TypicalProjector { delta } = code.decoder else {
        return Err(Error::DecoderMismatch("expected a typical-projector decoder".into()));
    };
    match &code.certification {
        Some(c) if c.feasible => {}
        Some(c) => {
            return Err(Error::PremiseNotCertified(format!(
                "certified exponent {:?} bits is below the required {} bits",
                c.min_exponent_bits, c.required_bits
            )))
        }
        None => return Err(Error::PremiseNotCertified("code carries no certification".into())),
    }
    let e = eta(delta, d);
    let lambda1 = BoundCheck::new(report.lambda1, e, 0.0);
    let lambda2 = BoundCheck::new(report.lambda2, e + 6.0 * (-delta * (code.n() as f64).sqrt()).exp2(), 0.0);
    Ok(TypicalBoundsCheck {
        eta: e,
        lambda1,
        lambda2,
        pass: lambda1.pass && lambda2.pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureBoundsCheck {
    pub lambda1: BoundCheck,
    pub lambda2: BoundCheck,
    pub pass: bool,
}

/// `lambda1 = 0` and `lambda2 <= 2^{-n^gamma t / 4}`, each within `1e-12`.
pub fn check_thm5(code: &DiCode, report: &ErrorReport) -> Result<PureBoundsCheck> {
    if code.decoder != Decoder::PureProjector {
        return Err(Error::DecoderMismatch("expected a pure-state decoder".into()));
    }
    let gamma = code
        .params
        .gamma
        .ok_or_else(|| Error::InvalidParameter("code records no gamma".into()))?;
    let lambda1 = BoundCheck::new(report.lambda1, 0.0, LAMBDA1_PURE_TOL);
    let lambda2 = BoundCheck::new(
        report.lambda2,
        pure_lambda2_bound(code.n(), gamma, code.params.t),
        LAMBDA2_PURE_TOL,
    );
    Ok(PureBoundsCheck {
        lambda1,
        lambda2,
        pass: lambda1.pass && lambda2.pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n: usize,
    pub codewords: usize,
    /// `log2 N / (n log2 n)`
    pub rate: f64,
    pub dimension: f64,
    /// `dimension / 4`
    pub lower_target: f64,
    /// `dimension / 2`
    pub upper_target: f64,
    /// Pure outputs: the square-root map is the identity, so the estimate of
    /// the output set is also the estimate of its square root.
    pub sqrt_map_preserves_dimension: bool,
}

pub fn rate_of(codewords: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("rate needs n >= 2 (log n = 0 at n = 1)".into()));
    }
    if codewords == 0 {
        return Err(Error::InvalidParameter("rate of an empty code".into()));
    }
    Ok((codewords as f64).log2() / (n as f64 * (n as f64).log2()))
}

pub fn rate_report(code: &DiCode, estimate: &DimensionEstimate, pure_outputs: bool) -> Result<RateReport> {
    let rate = rate_of(code.len(), code.n())?;
    Ok(RateReport {
        n: code.n(),
        codewords: code.len(),
        rate,
        dimension: estimate.lower,
        lower_target: 0.25 * estimate.lower,
        upper_target: 0.5 * estimate.lower,
        sqrt_map_preserves_dimension: pure_outputs,
    })
}

/// Re-evaluation of the hypothesis-testing bound on every ordered codeword
/// pair of a typical-projector code, with `epsilon` the certified upper bound
/// on `1 - T` for that pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Recheck {
    pub pairs: u64,
    pub min_margin: f64,
    pub pass: bool,
}

pub fn lemma2_recheck(code: &DiCode, channel: &CqChannel) -> Result<Lemma2Recheck> {
    check_channel(code, channel)?;
    let Decoder::TypicalProjector { delta } = code.decoder else {
        return Err(Error::DecoderMismatch("expected a typical-projector decoder".into()));
    };
    if code.len() > MAX_CERTIFIED_SCAN {
        return Err(Error::InvalidParameter(format!(
            "pairwise recheck limited to {MAX_CERTIFIED_SCAN} codewords"
        )));
    }
    let letters = code.letter_states(channel)?;
    let q = letters.len();
    let pure = letters.iter().all(|s| (s.purity() - 1.0).abs() <= PURITY_TOL);
    let f = overlap_table(&letters);
    let mut d2 = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in 0..q {
            d2[a][b] = sqrt_hs_distance(&letters[a], &letters[b])?.powi(2);
        }
    }
    let states = code.word_states(channel)?;
    let d = channel.output_dim();
    let n = code.n();
    let mut pairs = 0;
    let mut min_margin = f64::INFINITY;
    for j in 0..states.len() {
        let pi = typical_projector_capped(&states[j], delta, DEFAULT_ENUMERATION_CAP)?;
        for k in 0..states.len() {
            if k == j {
                continue;
            }
            let (u, v) = (code.codewords.get(j), code.codewords.get(k));
            let sum = 0.25 * u.iter().zip(v).map(|(&a, &b)| d2[a as usize][b as usize]).sum::<f64>();
            let mut epsilon = (-sum).exp();
            if pure {
                let p = overlap_product(&f, u, v).clamp(0.0, 1.0);
                epsilon = epsilon.min(p / (1.0 + (1.0 - p).sqrt()));
            }
            let rhs = lemma2_rhs(epsilon, delta, n, states[j].entropy(), states[k].entropy(), d);
            min_margin = min_margin.min(rhs - pi.cross_mass(&states[k])?);
            pairs += 1;
        }
    }
    Ok(Lemma2Recheck {
        pairs,
        min_margin,
        pass: min_margin >= -1e-9,
    })
}
