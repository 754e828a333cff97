//! Classical-quantum channels, product-word output states and POVM
//! concatenation.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianEig, C64, HERMITIAN_TOL, PSD_CLAMP_TOL};

/// Eigenvalues below this are exact zeros for entropy and surprisal purposes.
pub const ZERO_EIGENVALUE: f64 = 1e-15;

/// A validated quantum state: Hermitian, PSD and unit trace within `1e-10`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::validate(&m).map_err(|reason| Error::InvalidState { index: 0, reason })?;
        Ok(DensityMatrix(m))
    }

    fn validate(m: &ComplexMatrix) -> std::result::Result<(), String> {
        if m.dim() == 0 {
            return Err("empty matrix".into());
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(format!("not Hermitian (defect {defect:e})"));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(format!("trace {} + {}i is not 1", tr.re, tr.im));
        }
        let min = m.min_eig().map_err(|e| e.to_string())?;
        if min < -PSD_CLAMP_TOL {
            return Err(format!("not PSD (min eigenvalue {min:e})"));
        }
        Ok(())
    }

    /// `|psi><psi|` for a unit vector `psi`.
    pub fn pure(ket: &[C64]) -> Result<Self> {
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState {
                index: 0,
                reason: format!("ket norm {norm} is not 1"),
            });
        }
        Ok(DensityMatrix(ComplexMatrix::outer(ket)))
    }

    pub fn diag(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diag(probs))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `Tr rho^2`
    pub fn purity(&self) -> f64 {
        self.trace_product(self)
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() <= HERMITIAN_TOL
    }

    pub fn eig(&self) -> HermitianEig {
        self.0.herm_eig().expect("validated state is Hermitian")
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_spectrum(&self.0.herm_eigvals().expect("validated state is Hermitian"))
    }

    pub fn sqrt(&self) -> ComplexMatrix {
        self.0.mat_sqrt().expect("validated state is PSD")
    }
}

/// Von Neumann entropy in bits, `0 log 0 := 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy()
}

pub(crate) fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&p| p > ZERO_EIGENVALUE)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// A channel input: an index into a finite table or a parameter tuple of a
/// built-in family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Letter {
    Index(usize),
    Param(Vec<f64>),
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Index(i) => write!(f, "#{i}"),
            Letter::Param(p) => write!(f, "{p:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InputWord(pub Vec<Letter>);

impl InputWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Built-in parametrized qubit families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `theta in [0, pi)` mapped to `cos(theta)|0> + sin(theta)|1>`.
    BlochCircle,
    /// `(polar, azimuth)` with `polar in [0, max_polar]`, `azimuth in [0, 2pi)`,
    /// mapped to `cos(polar/2)|0> + e^{i azimuth} sin(polar/2)|1>`.
    BlochCap {
        #[serde(default = "default_max_polar")]
        max_polar: f64,
    },
    /// Middle-thirds Cantor parameter `c`, approximated at `depth`, mapped to
    /// the pure state at angle `theta = c pi / 4`.
    CantorCircle {
        #[serde(default = "default_cantor_depth")]
        depth: u32,
    },
    /// `p in [0, 1]` mapped to `diag(p, 1 - p)`.
    MixedSegment,
}

fn default_max_polar() -> f64 {
    PI / 4.0
}

pub const DEFAULT_CANTOR_DEPTH: u32 = 7;

fn default_cantor_depth() -> u32 {
    DEFAULT_CANTOR_DEPTH
}

impl Family {
    pub fn arity(&self) -> usize {
        match self {
            Family::BlochCap { .. } => 2,
            _ => 1,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Family::BlochCap { max_polar } if !(max_polar > 0.0 && max_polar <= PI) => Err(
                Error::InvalidParameter(format!("max_polar {max_polar} must lie in (0, pi]")),
            ),
            Family::CantorCircle { depth } if depth > 30 => {
                Err(Error::InvalidParameter(format!("cantor depth {depth} exceeds 30")))
            }
            _ => Ok(()),
        }
    }

    pub fn contains(&self, params: &[f64]) -> bool {
        const SLACK: f64 = 1e-12;
        if params.len() != self.arity() || params.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match *self {
            Family::BlochCircle => params[0] >= 0.0 && params[0] < PI,
            Family::BlochCap { max_polar } => {
                (0.0..=max_polar + SLACK).contains(&params[0]) && (0.0..2.0 * PI).contains(&params[1])
            }
            Family::CantorCircle { depth } => in_cantor_approximation(params[0], depth, SLACK),
            Family::MixedSegment => (0.0..=1.0).contains(&params[0]),
        }
    }

    fn state(&self, params: &[f64]) -> DensityMatrix {
        match *self {
            Family::BlochCircle => real_circle_state(params[0]),
            Family::CantorCircle { .. } => real_circle_state(params[0] * PI / 4.0),
            Family::BlochCap { .. } => {
                let (polar, az) = (params[0], params[1]);
                let ket = [
                    C64::new((polar / 2.0).cos(), 0.0),
                    C64::from_polar((polar / 2.0).sin(), az),
                ];
                DensityMatrix(ComplexMatrix::outer(&ket))
            }
            Family::MixedSegment => {
                let p = params[0];
                DensityMatrix(ComplexMatrix::from_real_diag(&[p, 1.0 - p]))
            }
        }
    }

    pub fn is_pure(&self) -> bool {
        !matches!(self, Family::MixedSegment)
    }
}

fn real_circle_state(theta: f64) -> DensityMatrix {
    let ket = [C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)];
    DensityMatrix(ComplexMatrix::outer(&ket))
}

/// Whether `c` lies in the union of the `2^depth` closed intervals of the
/// depth-`depth` middle-thirds construction.
pub fn in_cantor_approximation(c: f64, depth: u32, slack: f64) -> bool {
    if !(-slack..=1.0 + slack).contains(&c) {
        return false;
    }
    let mut x = c.clamp(0.0, 1.0);
    let mut width = 1.0;
    for _ in 0..depth {
        let third = width / 3.0;
        if x <= third + slack {
        } else if x >= 2.0 * third - slack {
            x -= 2.0 * third;
        } else {
            return false;
        }
        x = x.clamp(0.0, third);
        width = third;
    }
    true
}

/// Left endpoints of the depth-`depth` Cantor intervals, ascending.
pub fn cantor_points(depth: u32) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut step = 1.0;
    for _ in 0..depth {
        step /= 3.0;
        pts = pts.iter().flat_map(|&p| [p, p + 2.0 * step]).collect();
    }
    pts
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelKind {
    Table(Vec<DensityMatrix>),
    Family(Family),
}

/// A cq-channel `x -> W_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct CqChannel {
    dim: usize,
    kind: ChannelKind,
}

/// On-disk channel table: `{ "dim": d, "states": [ [[ [re,im], ... ] ...] ... ] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    pub states: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Serializable description of a channel, used by configs and code files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Family(Family),
    File { file: String },
    Table(ChannelFile),
}

impl ChannelSpec {
    pub fn build(&self) -> Result<CqChannel> {
        match self {
            ChannelSpec::Family(f) => CqChannel::family(f.clone()),
            ChannelSpec::File { file } => CqChannel::from_file(file),
            ChannelSpec::Table(t) => CqChannel::from_table_file(t),
        }
    }
}

impl CqChannel {
    pub fn table(states: Vec<DensityMatrix>) -> Result<Self> {
        let dim = states.first().map(|s| s.dim()).ok_or(Error::EmptyMatrix)?;
        if let Some((i, s)) = states.iter().enumerate().find(|(_, s)| s.dim() != dim) {
            return Err(Error::InvalidState {
                index: i,
                reason: format!("dimension {} differs from {dim}", s.dim()),
            });
        }
        Ok(CqChannel {
            dim,
            kind: ChannelKind::Table(states),
        })
    }

    pub fn family(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(CqChannel {
            dim: 2,
            kind: ChannelKind::Family(family),
        })
    }

    pub fn from_table_file(file: &ChannelFile) -> Result<Self> {
        if file.dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut states = Vec::with_capacity(file.states.len());
        for (index, raw) in file.states.iter().enumerate() {
            let bad = |reason: String| Error::InvalidState { index, reason };
            if raw.len() != file.dim || raw.iter().any(|r| r.len() != file.dim) {
                return Err(bad(format!("matrix is not {0}x{0}", file.dim)));
            }
            let rows = raw
                .iter()
                .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
                .collect();
            let m = ComplexMatrix::from_rows(rows).map_err(|e| bad(e.to_string()))?;
            DensityMatrix::validate(&m).map_err(bad)?;
            states.push(DensityMatrix(m));
        }
        Self::table(states)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ChannelFile = serde_json::from_str(&text)?;
        Self::from_table_file(&file)
    }

    pub fn to_table_file(&self) -> Option<ChannelFile> {
        match &self.kind {
            ChannelKind::Table(states) => Some(ChannelFile {
                dim: self.dim,
                states: states
                    .iter()
                    .map(|s| s.rows().into_iter().map(|r| r.into_iter().map(|z| [z.re, z.im]).collect()).collect())
                    .collect(),
            }),
            ChannelKind::Family(_) => None,
        }
    }

    pub fn spec(&self) -> ChannelSpec {
        match &self.kind {
            ChannelKind::Family(f) => ChannelSpec::Family(f.clone()),
            ChannelKind::Table(_) => ChannelSpec::Table(self.to_table_file().expect("table channel")),
        }
    }

    pub fn output_dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn contains(&self, x: &Letter) -> bool {
        match (&self.kind, x) {
            (ChannelKind::Table(states), Letter::Index(i)) => *i < states.len(),
            (ChannelKind::Family(f), Letter::Param(p)) => f.contains(p),
            _ => false,
        }
    }

    pub fn evaluate(&self, x: &Letter) -> Result<DensityMatrix> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain(x.to_string()));
        }
        Ok(match (&self.kind, x) {
            (ChannelKind::Table(states), Letter::Index(i)) => states[*i].clone(),
            (ChannelKind::Family(f), Letter::Param(p)) => f.state(p),
            _ => unreachable!("domain checked above"),
        })
    }

    pub fn word_state(&self, word: &InputWord) -> Result<ProductState> {
        let letters = word.0.iter().map(|x| self.evaluate(x)).collect::<Result<Vec<_>>>()?;
        ProductState::new(letters)
    }

    /// A uniformly drawn input: a table index, or family parameters drawn
    /// uniformly (Cantor parameters as random interval endpoints).
    pub fn random_letter<R: Rng + ?Sized>(&self, rng: &mut R) -> Letter {
        match &self.kind {
            ChannelKind::Table(states) => Letter::Index(rng.gen_range(0..states.len())),
            ChannelKind::Family(f) => Letter::Param(match *f {
                Family::BlochCircle => vec![rng.gen_range(0.0..PI)],
                Family::BlochCap { max_polar } => vec![rng.gen_range(0.0..=max_polar), rng.gen_range(0.0..2.0 * PI)],
                Family::CantorCircle { depth } => {
                    let mut c = 0.0;
                    let mut step = 1.0;
                    for _ in 0..depth {
                        step /= 3.0;
                        if rng.gen::<bool>() {
                            c += 2.0 * step;
                        }
                    }
                    vec![c]
                }
                Family::MixedSegment => vec![rng.gen_range(0.0..=1.0)],
            }),
        }
    }

    pub fn random_word<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> InputWord {
        InputWord((0..n).map(|_| self.random_letter(rng)).collect())
    }

    /// Whether every output of the channel is a pure state.
    pub fn is_pure_output(&self) -> bool {
        match &self.kind {
            ChannelKind::Table(states) => states.iter().all(|s| s.is_pure()),
            ChannelKind::Family(f) => f.is_pure(),
        }
    }
}

/// `W_{x_1} (x) ... (x) W_{x_n}` kept in factored form.
#[derive(Clone, Debug)]
pub struct ProductState {
    letters: Vec<DensityMatrix>,
    eigs: Vec<HermitianEig>,
    entropy: f64,
}

impl ProductState {
    pub fn new(letters: Vec<DensityMatrix>) -> Result<Self> {
        let eigs = letters.iter().map(|l| l.eig()).collect();
        Self::with_eigs(letters, eigs)
    }

    /// Uses caller-supplied per-letter eigenbases, which must reconstruct the
    /// letters within `1e-10`. Useful for choosing a basis inside degenerate
    /// eigenspaces.
    pub fn with_eigs(letters: Vec<DensityMatrix>, eigs: Vec<HermitianEig>) -> Result<Self> {
        let d = letters.first().map(|l| l.dim()).ok_or_else(|| {
            Error::InvalidParameter("a product state needs at least one letter".into())
        })?;
        if eigs.len() != letters.len() {
            return Err(Error::DimensionMismatch(letters.len(), eigs.len()));
        }
        for (i, (l, e)) in letters.iter().zip(&eigs).enumerate() {
            if l.dim() != d || e.dim() != d {
                return Err(Error::InvalidState {
                    index: i,
                    reason: format!("letter dimension {} differs from {d}", l.dim()),
                });
            }
            let recon = e.reconstruct().max_abs_diff(l);
            if recon > HERMITIAN_TOL {
                return Err(Error::InvalidState {
                    index: i,
                    reason: format!("eigenbasis does not reconstruct letter ({recon:e})"),
                });
            }
        }
        let entropy = eigs.iter().map(|e| entropy_of_spectrum(&e.values)).sum();
        Ok(ProductState { letters, eigs, entropy })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter_dim(&self) -> usize {
        self.letters[0].dim()
    }

    pub fn letters(&self) -> &[DensityMatrix] {
        &self.letters
    }

    pub fn eigs(&self) -> &[HermitianEig] {
        &self.eigs
    }

    /// `S(W_{x^n})` in bits.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// `n log2 d`, the log-dimension of the full tensor space.
    pub fn log2_total_dim(&self) -> f64 {
        self.len() as f64 * (self.letter_dim() as f64).log2()
    }

    pub fn total_dim(&self) -> u128 {
        (self.letter_dim() as u128).saturating_pow(self.len() as u32)
    }

    pub fn is_pure(&self) -> bool {
        self.letters.iter().all(|l| l.is_pure())
    }

    /// The full `d^n x d^n` tensor product.
    pub fn materialize(&self, cap: usize) -> Result<ComplexMatrix> {
        let total = self.total_dim();
        if total > cap as u128 {
            return Err(Error::CapExceeded {
                requested: total,
                cap: cap as u128,
            });
        }
        ComplexMatrix::kron_all(self.letters.iter().map(|l| l.matrix()), cap)
    }

    pub(crate) fn check_compatible(&self, other: &ProductState) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch(self.len(), other.len()));
        }
        if self.letter_dim() != other.letter_dim() {
            return Err(Error::DimensionMismatch(self.letter_dim(), other.letter_dim()));
        }
        Ok(())
    }
}

/// A measurement `(T_y)`: PSD effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self> {
        let d = effects
            .first()
            .map(|e| e.dim())
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let mut sum = ComplexMatrix::zeros(d);
        for (y, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(Error::InvalidPovm(format!("effect {y} has dimension {}", e.dim())));
            }
            let min = e
                .min_eig()
                .map_err(|err| Error::InvalidPovm(format!("effect {y}: {err}")))?;
            if min < -PSD_CLAMP_TOL {
                return Err(Error::InvalidPovm(format!("effect {y} is not PSD ({min:e})")));
            }
            sum = &sum + e;
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(d));
        if defect > HERMITIAN_TOL {
            return Err(Error::InvalidPovm(format!("effects sum to identity only within {defect:e}")));
        }
        Ok(Povm { effects })
    }

    pub fn trivial(dim: usize) -> Self {
        Povm {
            effects: vec![ComplexMatrix::identity(dim)],
        }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Povm {
            effects: (0..dim)
                .map(|k| {
                    let mut e = ComplexMatrix::zeros(dim);
                    e[(k, k)] = C64::new(1.0, 0.0);
                    e
                })
                .collect(),
        }
    }

    /// Rank-one projectors onto the columns of a unitary.
    pub fn from_basis(unitary: &ComplexMatrix) -> Result<Self> {
        let d = unitary.dim();
        let effects = (0..d)
            .map(|k| {
                let col: Vec<C64> = (0..d).map(|i| unitary[(i, k)]).collect();
                ComplexMatrix::outer(&col)
            })
            .collect();
        Self::new(effects)
    }

    /// Projective measurement in a Haar-random basis.
    pub fn random_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::from_basis(&haar_unitary(dim, rng)).expect("Haar basis forms a POVM")
    }

    /// `T_y = S^{-1/2} P_y S^{-1/2}` for random PSD `P_y` and `S = sum P_y`.
    pub fn random_splitting<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Self {
        let parts: Vec<ComplexMatrix> = (0..outcomes.max(1))
            .map(|_| {
                let g = ginibre(dim, rng);
                &g * &g.adjoint()
            })
            .collect();
        let total = parts.iter().fold(ComplexMatrix::zeros(dim), |acc, p| &acc + p);
        let inv_sqrt = total.herm_eig().expect("Hermitian").map_values(|x| 1.0 / x.sqrt());
        let effects: Vec<ComplexMatrix> = parts
            .iter()
            .map(|p| {
                let e = &(&inv_sqrt * p) * &inv_sqrt;
                e.herm_eig().expect("Hermitian").reconstruct()
            })
            .collect();
        // Absorb the last roundoff into the final effect so the sum is exact.
        let mut effects = effects;
        let partial = effects[..effects.len() - 1]
            .iter()
            .fold(ComplexMatrix::zeros(dim), |acc, e| &acc + e);
        let last = effects.len() - 1;
        effects[last] = &ComplexMatrix::identity(dim) - &partial;
        Povm::new(effects).expect("normalized splitting forms a POVM")
    }

    /// Merges outcomes: outcome `y` goes to bin `assignment[y]`.
    pub fn coarse_grain(&self, assignment: &[usize]) -> Result<Self> {
        if assignment.len() != self.effects.len() {
            return Err(Error::DimensionMismatch(self.effects.len(), assignment.len()));
        }
        let bins = assignment.iter().max().map_or(0, |m| m + 1);
        let d = self.dim();
        let mut out = vec![ComplexMatrix::zeros(d); bins];
        for (e, &b) in self.effects.iter().zip(assignment) {
            out[b] = &out[b] + e;
        }
        out.retain(|e| e.hs_norm() > 0.0);
        Ok(Povm { effects: out })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    /// Outcome distribution `Tr rho T_y`, with roundoff negatives clamped.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), rho.dim()));
        }
        self.effects
            .iter()
            .enumerate()
            .map(|(y, e)| {
                let p = rho.trace_product(e);
                if p < -1e-12 {
                    Err(Error::InvalidPovm(format!("negative probability {p:e} for outcome {y}")))
                } else {
                    Ok(p.max(0.0))
                }
            })
            .collect()
    }
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary by Gram–Schmidt on a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let mut cols: Vec<Vec<C64>> = (0..dim).map(|k| (0..dim).map(|i| g[(i, k)]).collect()).collect();
    for k in 0..dim {
        for j in 0..k {
            let proj: C64 = (0..dim).map(|i| cols[j][i].conj() * cols[k][i]).sum();
            for i in 0..dim {
                let sub = proj * cols[j][i];
                cols[k][i] -= sub;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[k].iter_mut() {
            *z /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |i, k| cols[k][i])
}

/// The classical channel `x -> (Tr W_x T_y)_y` on a list of inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalChannel {
    pub letters: Vec<Letter>,
    pub rows: Vec<Vec<f64>>,
}

pub fn concat_povm(channel: &CqChannel, povm: &Povm, letters: &[Letter]) -> Result<ClassicalChannel> {
    if povm.dim() != channel.output_dim() {
        return Err(Error::DimensionMismatch(channel.output_dim(), povm.dim()));
    }
    let rows = letters
        .iter()
        .map(|x| povm.probabilities(&channel.evaluate(x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassicalChannel {
        letters: letters.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn circle(theta: f64) -> Letter {
        Letter::Param(vec![theta])
    }

    #[test]
    fn circle_basis_state() {
        let ch = CqChannel::family(Family::BlochCircle).unwrap();
        let w = ch.evaluate(&circle(0.0)).unwrap();
        assert_eq!(*w.matrix(), ComplexMatrix::from_real_diag(&[1.0, 0.0]));
    }

    #[test]
    fn circle_diagonal_state() {
        let ch = CqChannel::family(Family::BlochCircle).unwrap();
        let w = ch.evaluate(&circle(PI / 4.0)).unwrap();
        let half = ComplexMatrix::from_fn(2, |_, _| C64::new(0.5, 0.0));
        assert!(w.max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn mixed_segment_midpoint() {
        let ch = CqChannel::family(Family::MixedSegment).unwrap();
        let w = ch.evaluate(&Letter::Param(vec![0.5])).unwrap();
        assert_eq!(w, DensityMatrix::maximally_mixed(2));
    }

    #[test]
    fn out_of_domain_letters() {
        let ch = CqChannel::family(Family::BlochCircle).unwrap();
        assert!(matches!(ch.evaluate(&circle(PI)), Err(Error::OutOfDomain(_))));
        assert!(ch.evaluate(&Letter::Index(0)).is_err());
        let seg = CqChannel::family(Family::MixedSegment).unwrap();
        assert!(seg.evaluate(&Letter::Param(vec![1.5])).is_err());
        let cantor = CqChannel::family(Family::CantorCircle { depth: 3 }).unwrap();
        assert!(cantor.evaluate(&Letter::Param(vec![0.5])).is_err());
        assert!(cantor.evaluate(&Letter::Param(vec![2.0 / 3.0])).is_ok());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(DensityMatrix::diag(&[1.0, 0.0]).unwrap().entropy(), 0.0);
        assert!((DensityMatrix::maximally_mixed(2).entropy() - 1.0).abs() < 1e-15);
        let h = DensityMatrix::diag(&[0.75, 0.25]).unwrap().entropy();
        // -(3/4) log2(3/4) - (1/4) log2(1/4), evaluated independently.
        assert!((h - 0.811_278_124_459_132_9).abs() < 1e-12);
    }

    #[test]
    fn word_entropy_is_additive() {
        let ch = CqChannel::family(Family::MixedSegment).unwrap();
        let word = InputWord(vec![Letter::Param(vec![0.75]); 4]);
        let w = ch.word_state(&word).unwrap();
        assert!((w.entropy() - 4.0 * 0.811_278_124_459_132_9).abs() < 1e-12);
        let pure = InputWord(vec![Letter::Param(vec![1.0]); 5]);
        assert_eq!(ch.word_state(&pure).unwrap().entropy(), 0.0);
        let flat = InputWord(vec![Letter::Param(vec![0.5]); 3]);
        assert!((ch.word_state(&flat).unwrap().entropy() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn z_povm_on_circle_and_segment() {
        let ch = CqChannel::family(Family::BlochCircle).unwrap();
        let theta: f64 = 0.3;
        let cl = concat_povm(&ch, &Povm::computational(2), &[circle(theta)]).unwrap();
        assert!((cl.rows[0][0] - theta.cos().powi(2)).abs() < 1e-15);
        assert!((cl.rows[0][1] - theta.sin().powi(2)).abs() < 1e-15);

        let seg = CqChannel::family(Family::MixedSegment).unwrap();
        let cl = concat_povm(&seg, &Povm::computational(2), &[Letter::Param(vec![0.2])]).unwrap();
        assert_eq!(cl.rows[0], vec![0.2, 0.8]);

        let cl = concat_povm(&seg, &Povm::trivial(2), &[Letter::Param(vec![0.2])]).unwrap();
        assert_eq!(cl.rows[0], vec![1.0]);
    }

    #[test]
    fn concat_dimension_mismatch() {
        let ch = CqChannel::family(Family::BlochCircle).unwrap();
        assert!(matches!(
            concat_povm(&ch, &Povm::trivial(3), &[circle(0.1)]),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn random_povms_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 1..5 {
            let p = Povm::random_splitting(3, k, &mut rng);
            assert!(Povm::new(p.effects().to_vec()).is_ok());
            let b = Povm::random_basis(3, &mut rng);
            assert_eq!(b.effects().len(), 3);
        }
    }

    #[test]
    fn channel_file_validation_reports_index() {
        let file = ChannelFile {
            dim: 2,
            states: vec![
                vec![vec![[1.0, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.0, 0.0]]],
                vec![vec![[0.6, 0.0], [0.0, 0.0]], vec![[0.0, 0.0], [0.6, 0.0]]],
            ],
        };
        match CqChannel::from_table_file(&file) {
            Err(Error::InvalidState { index: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cantor_points_are_in_the_set() {
        let pts = cantor_points(5);
        assert_eq!(pts.len(), 32);
        assert!(pts.iter().all(|&c| in_cantor_approximation(c, 5, 1e-12)));
        assert!(!in_cantor_approximation(0.4, 5, 1e-12));
    }

    #[test]
    fn family_json_shape() {
        let f: Family = serde_json::from_str(r#"{"family":"cantor_circle","depth":9}"#).unwrap();
        assert_eq!(f, Family::CantorCircle { depth: 9 });
        let f: Family = serde_json::from_str(r#"{"family":"bloch_circle"}"#).unwrap();
        assert_eq!(f, Family::BlochCircle);
        assert!(serde_json::from_str::<Family>(r#"{"family":"cantor_circle","deep":9}"#).is_err());
    }
}
