//! Hamming-distance codes over packing alphabets, entropy binning, and
//! assembly of deterministic identification codes with either entropy-typical
//! or pure-state decoders.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{ChannelSpec, CqChannel, DensityMatrix, InputWord, Letter, ProductState};
use crate::distinguish::{sqrt_hs_distance, LogBound};
use crate::error::{Error, Result};
use crate::geometry::{auto_packing, Metric, Packing};
use crate::typicality::{eta, max_delta, DEFAULT_ENUMERATION_CAP};
use crate::verify::ErrorReport;

/// Codes with more words than this are certified through the Hamming-distance
/// bound instead of a scan over all pairs.
pub const MAX_CERTIFIED_SCAN: usize = 4096;
pub const DEFAULT_SAMPLE_DRAWS: usize = 20_000;

/// Fixed-length words over `0..q`, stored flat.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Words {
    n: usize,
    flat: Vec<u16>,
}

impl Words {
    pub fn new(n: usize) -> Self {
        Words { n, flat: Vec::new() }
    }

    pub fn push(&mut self, word: &[u16]) {
        assert_eq!(word.len(), self.n, "word length");
        self.flat.extend_from_slice(word);
    }

    pub fn word_len(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        if self.n == 0 {
            0
        } else {
            self.flat.len() / self.n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, j: usize) -> &[u16] {
        &self.flat[j * self.n..(j + 1) * self.n]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u16]> + '_ {
        self.flat.chunks_exact(self.n.max(1))
    }

    pub fn select(&self, indices: &[usize]) -> Words {
        let mut out = Words::new(self.n);
        for &j in indices {
            out.push(self.get(j));
        }
        out
    }
}

impl Serialize for Words {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Words {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Vec<u16>> = Vec::deserialize(d)?;
        let n = raw.first().map_or(0, Vec::len);
        let mut words = Words::new(n);
        for w in &raw {
            if w.len() != n {
                return Err(D::Error::custom("codewords have different lengths"));
            }
            words.push(w);
        }
        Ok(words)
    }
}

pub fn hamming_distance(a: &[u16], b: &[u16]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// `ceil(t n)`, at least 1.
pub fn min_distance_for(t: f64, n: usize) -> usize {
    ((t * n as f64 - 1e-9).ceil() as usize).max(1)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Vol(n, r) = sum_{i <= r} C(n, i) (q - 1)^i`
pub fn hamming_ball_volume(q: usize, n: usize, r: usize) -> f64 {
    (0..=r.min(n)).map(|i| binomial(n, i) * ((q - 1) as f64).powi(i as i32)).sum()
}

/// `q^n / Vol(n, d - 1)`
pub fn gv_bound(q: usize, n: usize, d: usize) -> f64 {
    (q as f64).powi(n as i32) / hamming_ball_volume(q, n, d.saturating_sub(1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub draws: usize,
}

fn default_draws() -> usize {
    DEFAULT_SAMPLE_DRAWS
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GvOptions {
    /// Largest `q^n` enumerated exactly.
    pub cap: u128,
    /// Random-draw greedy above the cap; without it the cap is an error.
    pub sampling: Option<Sampling>,
}

impl Default for GvOptions {
    fn default() -> Self {
        GvOptions {
            cap: DEFAULT_ENUMERATION_CAP,
            sampling: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HammingCode {
    pub q: usize,
    pub n: usize,
    pub t: f64,
    pub min_dist: usize,
    pub words: Words,
    /// Built by random draws; the size bound is then only a target.
    pub sampled: bool,
}

impl HammingCode {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn gv_bound(&self) -> f64 {
        gv_bound(self.q, self.n, self.min_dist)
    }

    /// Smallest pairwise Hamming distance by exhaustive comparison,
    /// `None` for fewer than two words.
    pub fn measured_min_distance(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for j in 0..self.len() {
            for k in j + 1..self.len() {
                let d = hamming_distance(self.words.get(j), self.words.get(k));
                best = Some(best.map_or(d, |b| b.min(d)));
            }
        }
        best
    }
}

fn validate_code_params(q: usize, n: usize, t: f64) -> Result<()> {
    if q < 1 || q > u16::MAX as usize + 1 {
        return Err(Error::InvalidParameter(format!("alphabet size {q} out of range")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must lie in (0, 1]")));
    }
    Ok(())
}

fn total_words(q: usize, n: usize) -> Option<u128> {
    (q as u128).checked_pow(n as u32)
}

/// Greedy code with minimum Hamming distance `ceil(t n)` over `q` letters.
///
/// Within the cap the greedy runs over all words in lexicographic order; a
/// word is taken when no earlier pick lies within distance `d - 1`.  Balls
/// around each pick are marked in a bitset, which is equivalent to comparing
/// every pair.
pub fn gv_code(q: usize, n: usize, t: f64, opts: &GvOptions) -> Result<HammingCode> {
    validate_code_params(q, n, t)?;
    let d = min_distance_for(t, n);
    let total = total_words(q, n);
    match (total, opts.sampling) {
        (Some(total), _) if total <= opts.cap => Ok(exact_greedy(q, n, t, d, total as usize)),
        (_, Some(sampling)) => Ok(sampled_greedy(q, n, t, d, sampling)),
        (total, None) => Err(Error::CapExceeded {
            requested: total.unwrap_or(u128::MAX),
            cap: opts.cap,
        }),
    }
}

fn digits_of(mut index: u64, q: usize, n: usize, out: &mut [u16]) {
    for i in (0..n).rev() {
        out[i] = (index % q as u64) as u16;
        index /= q as u64;
    }
}

fn index_of(word: &[u16], q: usize) -> u64 {
    word.iter().fold(0u64, |acc, &a| acc * q as u64 + a as u64)
}

/// Calls `f` on the index of every word at Hamming distance `1..=r` from
/// `word`, changing positions `start..` only.
fn for_each_in_ball(word: &[u16], index: u64, q: usize, start: usize, r: usize, powers: &[u64], f: &mut impl FnMut(u64) -> bool) -> bool {
    if r == 0 {
        return true;
    }
    for p in start..word.len() {
        let a = word[p] as u64;
        for b in 0..q as u64 {
            if b == a {
                continue;
            }
            let moved = index - a * powers[p] + b * powers[p];
            if !f(moved) {
                return false;
            }
            // Recursion sees the original letter at p, which is fine since
            // later positions are strictly to the right.
            if !for_each_in_ball(word, moved, q, p + 1, r - 1, powers, f) {
                return false;
            }
        }
    }
    true
}

fn place_powers(q: usize, n: usize) -> Vec<u64> {
    let mut powers = vec![1u64; n];
    for i in (0..n.saturating_sub(1)).rev() {
        powers[i] = powers[i + 1] * q as u64;
    }
    powers
}

fn exact_greedy(q: usize, n: usize, t: f64, d: usize, total: usize) -> HammingCode {
    let powers = place_powers(q, n);
    let mut marked = vec![0u64; total.div_ceil(64)];
    let mut words = Words::new(n);
    let mut digits = vec![0u16; n];
    for w in 0..total {
        if marked[w / 64] >> (w % 64) & 1 == 1 {
            continue;
        }
        digits_of(w as u64, q, n, &mut digits);
        words.push(&digits);
        for_each_in_ball(&digits, w as u64, q, 0, d - 1, &powers, &mut |k| {
            let k = k as usize;
            marked[k / 64] |= 1 << (k % 64);
            true
        });
    }
    HammingCode {
        q,
        n,
        t,
        min_dist: d,
        words,
        sampled: false,
    }
}

fn sampled_greedy(q: usize, n: usize, t: f64, d: usize, sampling: Sampling) -> HammingCode {
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let powers = place_powers(q, n);
    let ball = hamming_ball_volume(q, n, d - 1);
    let mut chosen: HashSet<u64> = HashSet::new();
    let mut list: Vec<Vec<u16>> = Vec::new();
    let mut word = vec![0u16; n];
    for _ in 0..sampling.draws {
        for a in word.iter_mut() {
            *a = rng.gen_range(0..q) as u16;
        }
        let index = index_of(&word, q);
        if chosen.contains(&index) {
            continue;
        }
        // Enumerate the ball or scan the picks, whichever is cheaper.
        let admissible = if ball < (list.len() * n) as f64 {
            for_each_in_ball(&word, index, q, 0, d - 1, &powers, &mut |k| !chosen.contains(&k))
        } else {
            list.iter().all(|c| hamming_distance(c, &word) >= d)
        };
        if admissible {
            chosen.insert(index);
            list.push(word.clone());
        }
    }
    list.sort();
    let mut words = Words::new(n);
    for w in &list {
        words.push(w);
    }
    HammingCode {
        q,
        n,
        t,
        min_dist: d,
        words,
        sampled: true,
    }
}

/// Partition of words by output entropy into the unit bins `[s - 1, s]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Binning {
    /// `ceil(n log2 d)`
    pub bins: usize,
    /// Words per bin, index `s - 1`.
    pub sizes: Vec<usize>,
    /// The largest bin, smallest `s` on ties.
    pub chosen: usize,
    pub selected: Vec<usize>,
}

/// Bins entropies (in bits) of `n`-letter words with `d`-dimensional letters.
/// An entropy on a bin boundary goes to the lower bin.
pub fn bin_by_entropy(entropies: &[f64], n: usize, d: usize) -> Result<Binning> {
    if entropies.is_empty() {
        return Err(Error::InvalidParameter("entropy binning needs at least one word".into()));
    }
    let bins = ((n as f64 * (d as f64).log2() - 1e-12).ceil() as usize).max(1);
    let bin_of = |s: f64| ((s - 1e-12).ceil().max(1.0) as usize).min(bins);
    let mut sizes = vec![0usize; bins];
    for &s in entropies {
        sizes[bin_of(s) - 1] += 1;
    }
    let max = *sizes.iter().max().expect("nonempty");
    let chosen = sizes.iter().position(|&c| c == max).expect("max exists") + 1;
    let selected = entropies
        .iter()
        .enumerate()
        .filter(|(_, &s)| bin_of(s) == chosen)
        .map(|(j, _)| j)
        .collect();
    Ok(Binning {
        bins,
        sizes,
        chosen,
        selected,
    })
}

pub fn entropy_binning(words: &[InputWord], channel: &CqChannel) -> Result<Binning> {
    let n = words.first().map_or(0, InputWord::len);
    if words.iter().any(|w| w.len() != n) {
        return Err(Error::InvalidParameter("words have different lengths".into()));
    }
    let entropies = words
        .iter()
        .map(|w| Ok(channel.word_state(w)?.entropy()))
        .collect::<Result<Vec<_>>>()?;
    bin_by_entropy(&entropies, n, channel.output_dim())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Decoder {
    /// `E_j` is the entropy-typical projector of `W_{u_j}` at this delta.
    TypicalProjector { delta: f64 },
    /// `E_j = W_{u_j}` for pure outputs.
    PureProjector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeParams {
    pub n: usize,
    /// Packing exponent: letters are `n^{-alpha}` apart in the square-root metric.
    pub alpha: f64,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub packing_delta: f64,
    pub min_dist: usize,
    /// Size of the Hamming code before entropy binning.
    pub hamming_words: usize,
    pub hamming_sampled: bool,
}

/// Error bounds the construction promises, flagged when larger than 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClaimedBounds {
    pub lambda1: f64,
    pub lambda2: f64,
    pub vacuous: bool,
}

impl ClaimedBounds {
    fn new(lambda1: f64, lambda2: f64) -> Self {
        ClaimedBounds {
            lambda1,
            lambda2,
            vacuous: lambda1 > 1.0 || lambda2 > 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMethod {
    /// Exact `-ln(1 - T)` from overlap products of pure outputs.
    PureExact,
    /// `1/4 sum_i || sqrt(W_i) - sqrt(W'_i) ||_2^2` over every pair.
    LetterwiseSum,
    /// `1/4 d_min delta_pack^2`, valid for every pair of the Hamming code.
    HammingBound,
    /// Fewer than two codewords.
    NoPairs,
}

/// Whether every codeword pair provably satisfies
/// `1 - 1/2 || W_u - W_u' ||_1 <= 2^{-3 delta sqrt(n)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub method: CertMethod,
    pub pairs: u64,
    /// Smallest certified `-ln(1 - T)` over pairs, in bits; `None` when infinite.
    pub min_exponent_bits: Option<f64>,
    /// `3 delta sqrt(n)`
    pub required_bits: f64,
    /// `min_exponent_bits - required_bits`; `None` when infinite.
    pub margin_bits: Option<f64>,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiCode {
    pub channel: ChannelSpec,
    /// Packing letters; codewords index into this list.
    pub alphabet: Vec<Letter>,
    pub codewords: Words,
    pub decoder: Decoder,
    pub params: CodeParams,
    pub claimed: ClaimedBounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certification: Option<Certification>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<ErrorReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl DiCode {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn input_word(&self, j: usize) -> InputWord {
        InputWord(self.codewords.get(j).iter().map(|&a| self.alphabet[a as usize].clone()).collect())
    }

    /// Output states of the alphabet letters.
    pub fn letter_states(&self, channel: &CqChannel) -> Result<Vec<DensityMatrix>> {
        self.alphabet.iter().map(|x| channel.evaluate(x)).collect()
    }

    /// `W_{u_j}` for every codeword, sharing the letter eigendecompositions.
    pub fn word_states(&self, channel: &CqChannel) -> Result<Vec<ProductState>> {
        let letters = self.letter_states(channel)?;
        let eigs: Vec<_> = letters.iter().map(DensityMatrix::eig).collect();
        self.codewords
            .iter()
            .map(|w| {
                let ls = w.iter().map(|&a| letters[a as usize].clone()).collect();
                let es = w.iter().map(|&a| eigs[a as usize].clone()).collect();
                ProductState::with_eigs(ls, es)
            })
            .collect()
    }

    pub fn channel(&self) -> Result<CqChannel> {
        self.channel.build()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BuildOptions {
    pub gv: GvOptions,
}


fn packing_for(channel: &CqChannel, n: usize, alpha: f64) -> Result<Packing> {
    auto_packing(channel, (n as f64).powf(-alpha), Metric::SqrtHs)
}

fn letter_tables(states: &[DensityMatrix]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let q = states.len();
    let mut overlap = vec![vec![0.0; q]; q];
    let mut dist2 = vec![vec![0.0; q]; q];
    for a in 0..q {
        for b in 0..q {
            overlap[a][b] = states[a].trace_product(&states[b]);
            dist2[a][b] = sqrt_hs_distance(&states[a], &states[b])?.powi(2);
        }
    }
    Ok((overlap, dist2))
}

/// `-ln(1 - T)` for pure product states with overlap product `p`, using
/// `1 - T = p / (1 + sqrt(1 - p))` to avoid cancellation.
fn pure_log_bound(p: f64) -> LogBound {
    if p <= 0.0 {
        LogBound::Infinite
    } else {
        let p = p.min(1.0);
        LogBound::Finite(-p.ln() + (1.0 + (1.0 - p).sqrt()).ln())
    }
}

fn certify(words: &Words, states: &[DensityMatrix], pure: bool, min_dist: usize, packing_delta: f64, delta: f64) -> Result<Certification> {
    let n = words.word_len();
    let required_bits = 3.0 * delta * (n as f64).sqrt();
    let big_n = words.len();
    let pairs = (big_n as u64) * (big_n.saturating_sub(1) as u64) / 2;
    let (overlap, dist2) = letter_tables(states)?;
    let (method, nats) = if big_n < 2 {
        (CertMethod::NoPairs, LogBound::Infinite)
    } else if big_n > MAX_CERTIFIED_SCAN {
        (CertMethod::HammingBound, LogBound::Finite(0.25 * min_dist as f64 * packing_delta * packing_delta))
    } else {
        let mut worst = LogBound::Infinite;
        for j in 0..big_n {
            for k in j + 1..big_n {
                let (u, v) = (words.get(j), words.get(k));
                let sum: f64 = 0.25 * u.iter().zip(v).map(|(&a, &b)| dist2[a as usize][b as usize]).sum::<f64>();
                let bound = if pure {
                    let p: f64 = u.iter().zip(v).map(|(&a, &b)| overlap[a as usize][b as usize]).product();
                    match pure_log_bound(p) {
                        LogBound::Finite(x) => LogBound::Finite(x.max(sum)),
                        LogBound::Infinite => LogBound::Infinite,
                    }
                } else {
                    LogBound::Finite(sum)
                };
                worst = match (worst, bound) {
                    (LogBound::Infinite, b) => b,
                    (w, LogBound::Infinite) => w,
                    (LogBound::Finite(a), LogBound::Finite(b)) => LogBound::Finite(a.min(b)),
                };
            }
        }
        (if pure { CertMethod::PureExact } else { CertMethod::LetterwiseSum }, worst)
    };
    let min_exponent_bits = nats.finite().map(|x| x / std::f64::consts::LN_2);
    let margin_bits = min_exponent_bits.map(|b| b - required_bits);
    Ok(Certification {
        method,
        pairs,
        min_exponent_bits,
        required_bits,
        margin_bits,
        feasible: margin_bits.is_none_or(|m| m >= 0.0),
    })
}

/// Typical-projector construction: packing at scale `n^{-alpha}` in the
/// square-root metric, a Hamming code of distance `ceil(t n)` over it, the
/// largest entropy bin, and decoders `Pi^delta_{u_j}`.  The returned code
/// carries a [`Certification`]; an uncertifiable premise is reported there
/// with `feasible = false`.
pub fn assemble_thm4(channel: &CqChannel, n: usize, alpha: f64, t: f64, delta: f64, opts: &BuildOptions) -> Result<DiCode> {
    if n < 1 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, 1/4]")));
    }
    let d = channel.output_dim();
    let dmax = max_delta(n, d);
    if !(delta > 0.0 && delta <= dmax + 1e-12) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, {dmax}]")));
    }
    let packing = packing_for(channel, n, alpha)?;
    let hamming = gv_code(packing.len(), n, t, &opts.gv)?;
    let states: Vec<DensityMatrix> = packing.letters.iter().map(|x| channel.evaluate(x)).collect::<Result<_>>()?;
    let letter_entropy: Vec<f64> = states.iter().map(DensityMatrix::entropy).collect();
    let entropies: Vec<f64> = hamming
        .words
        .iter()
        .map(|w| w.iter().map(|&a| letter_entropy[a as usize]).sum())
        .collect();
    let binning = bin_by_entropy(&entropies, n, d)?;
    let codewords = hamming.words.select(&binning.selected);
    let certification = certify(&codewords, &states, channel.is_pure_output(), hamming.min_dist, packing.delta, delta)?;
    let e = eta(delta, d);
    Ok(DiCode {
        channel: channel.spec(),
        alphabet: packing.letters,
        codewords,
        decoder: Decoder::TypicalProjector { delta },
        params: CodeParams {
            n,
            alpha,
            t,
            delta: Some(delta),
            gamma: None,
            packing_delta: packing.delta,
            min_dist: hamming.min_dist,
            hamming_words: hamming.len(),
            hamming_sampled: hamming.sampled,
        },
        claimed: ClaimedBounds::new(e, e + 6.0 * (-delta * (n as f64).sqrt()).exp2()),
        certification: Some(certification),
        measured: None,
        provenance: None,
    })
}

/// `2^{-n^gamma t / 4}`
pub fn pure_lambda2_bound(n: usize, gamma: f64, t: f64) -> f64 {
    (-(n as f64).powf(gamma) * t / 4.0).exp2()
}

/// Pure-state construction: packing at scale `n^{-(1-gamma)/2}`, a Hamming
/// code of distance `ceil(t n)`, and decoders `E_j = W_{u_j}`.
pub fn assemble_pure(channel: &CqChannel, n: usize, gamma: f64, t: f64, opts: &BuildOptions) -> Result<DiCode> {
    if n < 1 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must lie in (0, 1)")));
    }
    if !channel.is_pure_output() {
        return Err(Error::DecoderMismatch("pure-state decoder needs pure channel outputs".into()));
    }
    let alpha = (1.0 - gamma) / 2.0;
    let packing = packing_for(channel, n, alpha)?;
    let hamming = gv_code(packing.len(), n, t, &opts.gv)?;
    Ok(DiCode {
        channel: channel.spec(),
        alphabet: packing.letters,
        codewords: hamming.words.clone(),
        decoder: Decoder::PureProjector,
        params: CodeParams {
            n,
            alpha,
            t,
            delta: None,
            gamma: Some(gamma),
            packing_delta: packing.delta,
            min_dist: hamming.min_dist,
            hamming_words: hamming.len(),
            hamming_sampled: hamming.sampled,
        },
        claimed: ClaimedBounds::new(0.0, pure_lambda2_bound(n, gamma, t)),
        certification: None,
        measured: None,
        provenance: None,
    })
}
