//! Greedy metric packings of channel output families and Minkowski-dimension
//! estimates built from packing numbers at a geometric sequence of scales.
//!
//! Every qubit family is embedded isometrically into a small Euclidean space:
//! for the square-root Hilbert–Schmidt metric the coordinates are the entries
//! of `sqrt(rho)`, for the trace metric they are `(rho_00, Re rho_01, Im rho_01)`
//! (half the Bloch vector).  Distances between candidates are then a handful of
//! flops, which keeps grids with millions of points affordable.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, CqChannel, Family, Letter, Povm};
use crate::distinguish::trace_distance_of;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Packings accept a candidate when every distance is at least `delta - PACKING_SLACK`.
pub const PACKING_SLACK: f64 = 1e-12;
/// The candidate grid must be this many times finer than the packing scale.
pub const GRID_REFINEMENT: f64 = 10.0;
/// Upper limit on automatically sized candidate grids.
pub const MAX_GRID_POINTS: usize = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `|| sqrt(rho) - sqrt(sigma) ||_2`; on probability vectors `|| sqrt(p) - sqrt(q) ||_2`.
    SqrtHs,
    /// `1/2 || rho - sigma ||_1`
    Trace,
}

impl Metric {
    pub fn distance(self, rho: &crate::channel::DensityMatrix, sigma: &crate::channel::DensityMatrix) -> Result<f64> {
        match self {
            Metric::SqrtHs => crate::distinguish::sqrt_hs_distance(rho, sigma),
            Metric::Trace => crate::distinguish::trace_distance(rho, sigma),
        }
    }

    /// Distance between two pure states with `|<psi|phi>|^2 = 1 - s^2`.
    fn pure_chord(self, s: f64) -> f64 {
        match self {
            Metric::SqrtHs => SQRT_2 * s,
            Metric::Trace => s,
        }
    }
}

/// Ordered candidate set over which packings are taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateGrid {
    /// Every entry of a finite table.
    Table { states: usize },
    /// `theta_k = k pi / points`.
    Circle { points: usize },
    /// `p_k = k / (points - 1)`.
    Segment { points: usize },
    /// Left endpoints of the Cantor intervals at the family depth.
    Cantor { depth: u32 },
    /// Polar-major product grid over `[0, max_polar] x [0, 2 pi)`.
    Cap { polar: usize, azimuth: usize, max_polar: f64 },
}

impl CandidateGrid {
    pub fn len(&self) -> usize {
        match *self {
            CandidateGrid::Table { states } => states,
            CandidateGrid::Circle { points } | CandidateGrid::Segment { points } => points,
            CandidateGrid::Cantor { depth } => 1usize << depth,
            CandidateGrid::Cap { polar, azimuth, .. } => polar * azimuth,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid of a given linear size (points per parameter axis).
    pub fn with_size(channel: &CqChannel, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter("candidate grid needs at least 2 points per axis".into()));
        }
        Ok(match channel.kind() {
            ChannelKind::Table(states) => CandidateGrid::Table { states: states.len() },
            ChannelKind::Family(Family::BlochCircle) => CandidateGrid::Circle { points },
            ChannelKind::Family(Family::MixedSegment) => CandidateGrid::Segment { points },
            ChannelKind::Family(Family::CantorCircle { depth }) => CandidateGrid::Cantor { depth: *depth },
            ChannelKind::Family(Family::BlochCap { max_polar }) => CandidateGrid::Cap {
                polar: points,
                azimuth: points,
                max_polar: *max_polar,
            },
        })
    }

    /// Smallest grid whose resolution under `scale * metric` is at most
    /// `finest_delta / 10`.  Cantor grids are fixed by the family depth.
    pub fn auto(channel: &CqChannel, metric: Metric, scale: f64, finest_delta: f64) -> Result<Self> {
        if !(finest_delta > 0.0 && scale > 0.0) {
            return Err(Error::InvalidParameter("scale and delta must be positive".into()));
        }
        // Target distance resolution in the unscaled metric.
        let r = (finest_delta / GRID_REFINEMENT / scale).min(1.0);
        // Pure-state chord `s` with `pure_chord(s) <= r`.
        let s = match metric {
            Metric::SqrtHs => r / SQRT_2,
            Metric::Trace => r,
        };
        let grid = match channel.kind() {
            ChannelKind::Table(states) => CandidateGrid::Table { states: states.len() },
            ChannelKind::Family(Family::BlochCircle) => CandidateGrid::Circle {
                points: bounded((PI / s.asin()).ceil() + 1.0)?.max(2),
            },
            ChannelKind::Family(Family::MixedSegment) => {
                let h = match metric {
                    Metric::SqrtHs => (2.0 * (r / 2.0).asin()).min(FRAC_PI_2).sin().powi(2),
                    Metric::Trace => r,
                };
                CandidateGrid::Segment {
                    points: bounded((1.0 / h).ceil() + 2.0)?,
                }
            }
            ChannelKind::Family(Family::CantorCircle { depth }) => CandidateGrid::Cantor { depth: *depth },
            ChannelKind::Family(Family::BlochCap { max_polar }) => {
                let angle = 2.0 * s.asin();
                let h = angle / 2.0;
                let polar = bounded((max_polar / h).ceil() + 2.0)?;
                let azimuth = bounded((2.0 * PI * cap_sin(*max_polar) / h).ceil() + 1.0)?.max(1);
                bounded((polar * azimuth) as f64)?;
                CandidateGrid::Cap {
                    polar,
                    azimuth,
                    max_polar: *max_polar,
                }
            }
        };
        Ok(grid)
    }

    /// Largest metric distance from a family point to its nearest grid
    /// neighbour, from the analytic modulus of continuity of the family.
    pub fn resolution(&self, metric: Metric) -> f64 {
        match *self {
            CandidateGrid::Table { .. } => 0.0,
            CandidateGrid::Circle { points } => metric.pure_chord((PI / points as f64).sin()),
            CandidateGrid::Segment { points } => {
                let h = 1.0 / (points as f64 - 1.0);
                match metric {
                    Metric::SqrtHs => 2.0 * (h.sqrt().asin() / 2.0).sin(),
                    Metric::Trace => h,
                }
            }
            CandidateGrid::Cantor { depth } => metric.pure_chord((3f64.powi(-(depth as i32)) * PI / 4.0).sin()),
            CandidateGrid::Cap {
                polar,
                azimuth,
                max_polar,
            } => {
                let hp = if polar > 1 { max_polar / (polar as f64 - 1.0) } else { max_polar };
                let ha = 2.0 * PI / azimuth as f64;
                let angle = (hp + ha * cap_sin(max_polar)).min(PI);
                metric.pure_chord((angle / 2.0).sin())
            }
        }
    }

    pub fn letter(&self, k: usize) -> Letter {
        match *self {
            CandidateGrid::Table { .. } => Letter::Index(k),
            CandidateGrid::Circle { points } => Letter::Param(vec![k as f64 * PI / points as f64]),
            CandidateGrid::Segment { points } => Letter::Param(vec![segment_point(k, points)]),
            CandidateGrid::Cantor { depth } => Letter::Param(vec![cantor_point(k, depth)]),
            CandidateGrid::Cap {
                polar,
                azimuth,
                max_polar,
            } => {
                let (a, b) = cap_point(k, polar, azimuth, max_polar);
                Letter::Param(vec![a, b])
            }
        }
    }

    fn check_matches(&self, channel: &CqChannel) -> Result<()> {
        let ok = match (self, channel.kind()) {
            (CandidateGrid::Table { states }, ChannelKind::Table(t)) => *states == t.len(),
            (CandidateGrid::Circle { points }, ChannelKind::Family(Family::BlochCircle)) => *points >= 1,
            (CandidateGrid::Segment { points }, ChannelKind::Family(Family::MixedSegment)) => *points >= 2,
            (CandidateGrid::Cantor { depth }, ChannelKind::Family(Family::CantorCircle { depth: d })) => depth == d,
            (
                CandidateGrid::Cap { max_polar, polar, azimuth },
                ChannelKind::Family(Family::BlochCap { max_polar: m }),
            ) => max_polar == m && *polar >= 1 && *azimuth >= 1,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("grid {self:?} does not match the channel")))
        }
    }
}

fn bounded(x: f64) -> Result<usize> {
    if !(x.is_finite() && x <= MAX_GRID_POINTS as f64) {
        return Err(Error::InvalidParameter(format!(
            "candidate grid of {x:e} points exceeds the limit {MAX_GRID_POINTS}"
        )));
    }
    Ok(x as usize)
}

fn cap_sin(max_polar: f64) -> f64 {
    max_polar.min(FRAC_PI_2).sin()
}

fn segment_point(k: usize, points: usize) -> f64 {
    if k + 1 == points {
        1.0
    } else {
        k as f64 / (points as f64 - 1.0)
    }
}

fn cantor_point(k: usize, depth: u32) -> f64 {
    // Bits of k, most significant first, select the left or right third.
    let mut c = 0.0;
    let mut step = 1.0;
    for level in (0..depth).rev() {
        step /= 3.0;
        if (k >> level) & 1 == 1 {
            c += 2.0 * step;
        }
    }
    c
}

fn cap_point(k: usize, polar: usize, azimuth: usize, max_polar: f64) -> (f64, f64) {
    let (i, j) = (k / azimuth, k % azimuth);
    let a = if polar > 1 { max_polar * i as f64 / (polar as f64 - 1.0) } else { 0.0 };
    (a, 2.0 * PI * j as f64 / azimuth as f64)
}

/// Coordinates of a pure or diagonal qubit state such that the Euclidean
/// distance equals the chosen metric.
fn qubit_coords(rho00: f64, rho11: f64, re01: f64, im01: f64, metric: Metric) -> [f64; 4] {
    match metric {
        Metric::SqrtHs => [rho00, rho11, SQRT_2 * re01, SQRT_2 * im01],
        Metric::Trace => [rho00, re01, im01, 0.0],
    }
}

fn euclid<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn euclid_vec(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Real coordinates of a Hermitian matrix with Euclidean norm equal to the
/// Hilbert–Schmidt norm.
fn hs_coords(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m[(i, i)].re);
        for j in i + 1..d {
            out.push(SQRT_2 * m[(i, j)].re);
            out.push(SQRT_2 * m[(i, j)].im);
        }
    }
    out
}

/// First-fit greedy packing at every scale in one pass over the candidates.
/// Returns the chosen candidate indices per scale.
fn first_fit<P: Clone>(
    count: usize,
    mut point: impl FnMut(usize) -> Result<P>,
    dist: impl Fn(&P, &P) -> f64,
    scales: &[f64],
) -> Result<Vec<Vec<usize>>> {
    let mut chosen: Vec<Vec<(usize, P)>> = scales.iter().map(|_| Vec::new()).collect();
    for k in 0..count {
        let p = point(k)?;
        for (picked, &delta) in chosen.iter_mut().zip(scales) {
            let threshold = delta - PACKING_SLACK;
            // Newest first: a rejected candidate is usually close to a recent pick.
            if picked.iter().rev().all(|(_, q)| dist(&p, q) >= threshold) {
                picked.push((k, p.clone()));
            }
        }
    }
    Ok(chosen.into_iter().map(|v| v.into_iter().map(|(k, _)| k).collect()).collect())
}

/// A channel's outputs on a candidate grid under a (possibly rescaled) metric,
/// or the classical image of those outputs under a fixed POVM.
#[derive(Clone, Debug)]
pub struct PointSet<'a> {
    channel: &'a CqChannel,
    grid: CandidateGrid,
    metric: Metric,
    scale: f64,
    povm: Option<&'a Povm>,
}

impl<'a> PointSet<'a> {
    pub fn quantum(channel: &'a CqChannel, grid: CandidateGrid, metric: Metric) -> Result<Self> {
        grid.check_matches(channel)?;
        Ok(PointSet {
            channel,
            grid,
            metric,
            scale: 1.0,
            povm: None,
        })
    }

    /// Probability vectors `x -> (Tr W_x T_y)_y` under `|| sqrt(p) - sqrt(q) ||_2`.
    /// The grid resolution of the quantum square-root metric bounds the
    /// classical one, since classical fidelity dominates quantum fidelity.
    pub fn classical(channel: &'a CqChannel, povm: &'a Povm, grid: CandidateGrid) -> Result<Self> {
        grid.check_matches(channel)?;
        if povm.dim() != channel.output_dim() {
            return Err(Error::DimensionMismatch(channel.output_dim(), povm.dim()));
        }
        Ok(PointSet {
            channel,
            grid,
            metric: Metric::SqrtHs,
            scale: 1.0,
            povm: Some(povm),
        })
    }

    /// The same set under `c * metric`.
    pub fn scaled(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("metric scale {c} must be positive")));
        }
        self.scale *= c;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &CandidateGrid {
        &self.grid
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn resolution(&self) -> f64 {
        self.scale * self.grid.resolution(self.metric)
    }

    pub fn letter(&self, k: usize) -> Letter {
        self.grid.letter(k)
    }

    fn check_resolution(&self, delta: f64) -> Result<()> {
        let resolution = self.resolution();
        if resolution * GRID_REFINEMENT > delta + PACKING_SLACK {
            return Err(Error::GridTooCoarse { resolution, delta });
        }
        Ok(())
    }

    /// Chosen candidate indices of the first-fit packing at each scale.
    pub fn packing_indices(&self, scales: &[f64]) -> Result<Vec<Vec<usize>>> {
        for &delta in scales {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::InvalidParameter(format!("packing scale {delta} must be positive")));
            }
            self.check_resolution(delta)?;
        }
        let c = self.scale;
        let n = self.len();
        if let Some(povm) = self.povm {
            let sqrt_probs = |k: usize| -> Result<Vec<f64>> {
                let rho = self.channel.evaluate(&self.letter(k))?;
                Ok(povm.probabilities(&rho)?.into_iter().map(f64::sqrt).collect())
            };
            return first_fit(n, sqrt_probs, |a, b| c * euclid_vec(a, b), scales);
        }
        let metric = self.metric;
        match (&self.grid, self.channel.kind()) {
            (CandidateGrid::Table { .. }, ChannelKind::Table(states)) => {
                if metric == Metric::Trace && self.channel.output_dim() > 2 {
                    let get = |k: usize| Ok(states[k].matrix().clone());
                    let dist = |a: &ComplexMatrix, b: &ComplexMatrix| {
                        c * trace_distance_of(a, b).expect("table states share a dimension")
                    };
                    return first_fit(n, get, dist, scales);
                }
                let get = |k: usize| -> Result<Vec<f64>> {
                    let s = &states[k];
                    Ok(match metric {
                        Metric::SqrtHs => hs_coords(&s.sqrt()),
                        Metric::Trace => vec![s[(0, 0)].re, s[(0, 1)].re, s[(0, 1)].im],
                    })
                };
                first_fit(n, get, |a, b| c * euclid_vec(a, b), scales)
            }
            (grid, _) => {
                let get = |k: usize| -> Result<[f64; 4]> {
                    Ok(match (grid, self.letter(k)) {
                        (CandidateGrid::Segment { .. }, Letter::Param(v)) => {
                            let p = v[0];
                            match metric {
                                Metric::SqrtHs => [p.sqrt(), (1.0 - p).sqrt(), 0.0, 0.0],
                                Metric::Trace => [p, 0.0, 0.0, 0.0],
                            }
                        }
                        (CandidateGrid::Cap { .. }, Letter::Param(v)) => {
                            let (ca, sa) = ((v[0] / 2.0).cos(), (v[0] / 2.0).sin());
                            let (re, im) = (ca * sa * v[1].cos(), -ca * sa * v[1].sin());
                            qubit_coords(ca * ca, sa * sa, re, im, metric)
                        }
                        (CandidateGrid::Cantor { .. }, Letter::Param(v)) => {
                            let t = v[0] * PI / 4.0;
                            qubit_coords(t.cos().powi(2), t.sin().powi(2), t.cos() * t.sin(), 0.0, metric)
                        }
                        (_, Letter::Param(v)) => {
                            let t = v[0];
                            qubit_coords(t.cos().powi(2), t.sin().powi(2), t.cos() * t.sin(), 0.0, metric)
                        }
                        (_, Letter::Index(_)) => unreachable!("family grids produce parameter letters"),
                    })
                };
                first_fit(n, get, |a, b| c * euclid(a, b), scales)
            }
        }
    }

    pub fn packing(&self, delta: f64) -> Result<Packing> {
        let idx = self.packing_indices(&[delta])?.pop().expect("one scale");
        Ok(Packing {
            metric: self.metric,
            delta,
            letters: idx.into_iter().map(|k| self.letter(k)).collect(),
            grid: Some(self.grid.clone()),
        })
    }

    /// `min_k max_j` distance from each grid candidate to the packing, i.e.
    /// whether the packing is maximal (every candidate within `delta`).
    pub fn is_maximal(&self, packing: &Packing) -> Result<bool> {
        for k in 0..self.len() {
            let x = self.channel.evaluate(&self.letter(k))?;
            let mut covered = false;
            for y in &packing.letters {
                let y = self.channel.evaluate(y)?;
                if self.scale * self.metric.distance(&x, &y)? < packing.delta - PACKING_SLACK {
                    covered = true;
                    break;
                }
            }
            if !covered {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A set of channel inputs whose outputs are pairwise at least `delta` apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Packing {
    pub metric: Metric,
    pub delta: f64,
    pub letters: Vec<Letter>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<CandidateGrid>,
}

impl Packing {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Smallest pairwise distance, `+inf` for fewer than two points.
    pub fn min_distance(&self, channel: &CqChannel) -> Result<f64> {
        let states = self
            .letters
            .iter()
            .map(|x| channel.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        let mut best = f64::INFINITY;
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                best = best.min(self.metric.distance(&states[i], &states[j])?);
            }
        }
        Ok(best)
    }
}

/// First-fit greedy packing of the channel outputs on `grid`.
pub fn greedy_packing(channel: &CqChannel, grid: &CandidateGrid, delta: f64, metric: Metric) -> Result<Packing> {
    PointSet::quantum(channel, grid.clone(), metric)?.packing(delta)
}

/// Greedy packing on an automatically sized grid.
pub fn auto_packing(channel: &CqChannel, delta: f64, metric: Metric) -> Result<Packing> {
    let grid = CandidateGrid::auto(channel, metric, 1.0, delta)?;
    greedy_packing(channel, &grid, delta, metric)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
}

fn default_delta0() -> f64 {
    0.5
}
fn default_ratio() -> f64 {
    0.5
}
fn default_steps() -> usize {
    8
}
fn default_tail() -> f64 {
    0.5
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            delta0: default_delta0(),
            ratio: default_ratio(),
            steps: default_steps(),
            tail_fraction: default_tail(),
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta0 {} must be positive", self.delta0)));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidParameter(format!("ratio {} must lie in (0, 1)", self.ratio)));
        }
        if self.steps < 4 {
            return Err(Error::InvalidParameter(format!("schedule needs at least 4 steps, got {}", self.steps)));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tail fraction {} must lie in (0, 1]",
                self.tail_fraction
            )));
        }
        Ok(())
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.delta0 * self.ratio.powi(k as i32)).collect()
    }

    pub fn finest(&self) -> f64 {
        self.delta0 * self.ratio.powi(self.steps as i32 - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Liminf,
    Limsup,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub metric: Metric,
    pub mode: Mode,
    pub scales: Vec<f64>,
    /// Greedy packing sizes as found.
    pub raw_counts: Vec<usize>,
    /// Running maximum of `raw_counts`, nondecreasing as the scale shrinks.
    pub counts: Vec<usize>,
    /// `log(N_{k+1} / N_k) / log(delta_k / delta_{k+1})`
    pub slopes: Vec<f64>,
    pub tail_fraction: f64,
    /// Number of trailing slopes entering `lower` and `upper`.
    pub tail_len: usize,
    pub lower: f64,
    pub upper: f64,
    /// All counts equal: the set looks finite and the dimension is 0.
    pub flat: bool,
    /// Smallest `N_k^{1/lower} delta_k` over the tail, so that
    /// `N(delta) >= (K / delta)^lower` there; absent when `lower` is 0.
    pub prefactor: Option<f64>,
    pub grid: CandidateGrid,
}

impl DimensionEstimate {
    /// `lower` in liminf mode, `upper` in limsup mode.
    pub fn value(&self) -> f64 {
        match self.mode {
            Mode::Liminf => self.lower,
            Mode::Limsup => self.upper,
        }
    }
}

pub fn estimate_from_counts(scales: &[f64], raw_counts: &[usize], tail_fraction: f64) -> (Vec<usize>, Vec<f64>, usize, f64, f64) {
    let mut counts = Vec::with_capacity(raw_counts.len());
    let mut running = 0;
    for &c in raw_counts {
        running = running.max(c);
        counts.push(running);
    }
    let slopes: Vec<f64> = (0..counts.len().saturating_sub(1))
        .map(|k| (counts[k + 1] as f64 / counts[k] as f64).ln() / (scales[k] / scales[k + 1]).ln())
        .collect();
    let tail_len = ((tail_fraction * slopes.len() as f64).ceil() as usize).clamp(1, slopes.len().max(1));
    let tail = &slopes[slopes.len().saturating_sub(tail_len)..];
    let lower = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (counts, slopes, tail_len, lower, upper)
}

pub fn minkowski_estimate(points: &PointSet, schedule: &Schedule, mode: Mode) -> Result<DimensionEstimate> {
    schedule.validate()?;
    let scales = schedule.scales();
    let raw_counts: Vec<usize> = points.packing_indices(&scales)?.iter().map(Vec::len).collect();
    let (counts, slopes, tail_len, lower, upper) = estimate_from_counts(&scales, &raw_counts, schedule.tail_fraction);
    let flat = counts.iter().all(|&c| c == counts[0]);
    let (lower, upper) = if flat { (0.0, 0.0) } else { (lower, upper) };
    let prefactor = (lower > 0.0).then(|| {
        let first = counts.len() - tail_len - 1;
        (first..counts.len())
            .map(|k| (counts[k] as f64).powf(1.0 / lower) * scales[k])
            .fold(f64::INFINITY, f64::min)
    });
    Ok(DimensionEstimate {
        metric: points.metric(),
        mode,
        scales,
        raw_counts,
        counts,
        slopes,
        tail_fraction: schedule.tail_fraction,
        tail_len,
        lower,
        upper,
        flat,
        prefactor,
        grid: points.grid().clone(),
    })
}

/// Dimension estimate of the channel outputs on an automatically sized grid.
pub fn estimate_dimension(channel: &CqChannel, metric: Metric, schedule: &Schedule, mode: Mode) -> Result<DimensionEstimate> {
    schedule.validate()?;
    let grid = CandidateGrid::auto(channel, metric, 1.0, schedule.finest())?;
    minkowski_estimate(&PointSet::quantum(channel, grid, metric)?, schedule, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{cantor_points, DensityMatrix};
    use proptest::prelude::*;

    fn circle() -> CqChannel {
        CqChannel::family(Family::BlochCircle).unwrap()
    }

    fn thetas(p: &Packing) -> Vec<f64> {
        p.letters
            .iter()
            .map(|l| match l {
                Letter::Param(v) => v[0],
                Letter::Index(_) => panic!(),
            })
            .collect()
    }

    #[test]
    fn single_point_table() {
        let ch = CqChannel::table(vec![DensityMatrix::maximally_mixed(2)]).unwrap();
        let grid = CandidateGrid::with_size(&ch, 2).unwrap();
        for delta in [1e-3, 0.5, 2.0] {
            assert_eq!(greedy_packing(&ch, &grid, delta, Metric::SqrtHs).unwrap().len(), 1);
        }
        let est = estimate_dimension(&ch, Metric::Trace, &Schedule::default(), Mode::Liminf).unwrap();
        assert!(est.flat);
        assert_eq!(est.lower, 0.0);
    }

    #[test]
    fn circle_chord_packings() {
        let grid = CandidateGrid::Circle { points: 160 };
        // Chord metric sqrt(2)|sin(dtheta)|: delta = 1 admits spacing pi/4.
        let p = greedy_packing(&circle(), &grid, 1.0, Metric::SqrtHs).unwrap();
        let t = thetas(&p);
        assert_eq!(t.len(), 4);
        for (k, x) in t.iter().enumerate() {
            assert!((x - k as f64 * PI / 4.0).abs() < 1e-12);
        }
        let delta = SQRT_2 * (PI / 8.0).sin();
        let p = greedy_packing(&circle(), &grid, delta, Metric::SqrtHs).unwrap();
        assert_eq!(p.len(), 8);
        assert!(p.min_distance(&circle()).unwrap() >= delta - 1e-12);
    }

    #[test]
    fn coarse_grid_rejected() {
        let grid = CandidateGrid::Circle { points: 16 };
        let err = greedy_packing(&circle(), &grid, 0.1, Metric::SqrtHs).unwrap_err();
        assert!(matches!(err, Error::GridTooCoarse { .. }));
    }

    #[test]
    fn grid_kind_must_match_channel() {
        let grid = CandidateGrid::Segment { points: 100 };
        assert!(greedy_packing(&circle(), &grid, 0.5, Metric::Trace).is_err());
    }

    #[test]
    fn auto_grid_meets_resolution() {
        for family in [
            Family::BlochCircle,
            Family::MixedSegment,
            Family::BlochCap { max_polar: PI / 4.0 },
        ] {
            let ch = CqChannel::family(family).unwrap();
            for metric in [Metric::SqrtHs, Metric::Trace] {
                let g = CandidateGrid::auto(&ch, metric, 1.0, 0.05).unwrap();
                assert!(g.resolution(metric) <= 0.005 + 1e-15, "{g:?}");
            }
        }
    }

    #[test]
    fn cantor_grid_points() {
        let g = CandidateGrid::Cantor { depth: 4 };
        let pts: Vec<f64> = (0..g.len())
            .map(|k| match g.letter(k) {
                Letter::Param(v) => v[0],
                _ => unreachable!(),
            })
            .collect();
        let want = cantor_points(4);
        assert_eq!(pts.len(), want.len());
        for (a, b) in pts.iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn embedded_packings_are_separated() {
        for family in [
            Family::BlochCircle,
            Family::MixedSegment,
            Family::BlochCap { max_polar: 2.0 },
            Family::CantorCircle { depth: 3 },
        ] {
            let ch = CqChannel::family(family).unwrap();
            let grid = CandidateGrid::with_size(&ch, 40).unwrap();
            for metric in [Metric::SqrtHs, Metric::Trace] {
                let set = PointSet::quantum(&ch, grid.clone(), metric).unwrap();
                let delta = 0.3;
                if set.resolution() * GRID_REFINEMENT > delta {
                    continue;
                }
                let p = set.packing(delta).unwrap();
                assert!(p.min_distance(&ch).unwrap() >= delta - 1e-12);
            }
        }
    }

    #[test]
    fn classical_trivial_povm_is_a_point() {
        let ch = circle();
        let povm = Povm::trivial(2);
        let schedule = Schedule::default();
        let grid = CandidateGrid::auto(&ch, Metric::SqrtHs, 1.0, schedule.finest()).unwrap();
        let set = PointSet::classical(&ch, &povm, grid).unwrap();
        let est = minkowski_estimate(&set, &schedule, Mode::Liminf).unwrap();
        assert!(est.flat);
        assert_eq!(est.lower, 0.0);
    }

    #[test]
    fn circle_estimate_near_one() {
        let est = estimate_dimension(&circle(), Metric::SqrtHs, &Schedule::default(), Mode::Liminf).unwrap();
        assert!((est.lower - 1.0).abs() <= 0.1, "{est:?}");
        assert!(est.lower <= est.upper);
        assert!(est.counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn slopes_from_counts() {
        let scales = [1.0, 0.5, 0.25, 0.125];
        let (counts, slopes, tail_len, lo, hi) = estimate_from_counts(&scales, &[1, 2, 2, 8], 0.5);
        assert_eq!(counts, vec![1, 2, 2, 8]);
        assert_eq!(slopes, vec![1.0, 0.0, 2.0]);
        assert_eq!(tail_len, 2);
        assert_eq!((lo, hi), (0.0, 2.0));
        let (counts, ..) = estimate_from_counts(&scales, &[3, 2, 4, 4], 0.5);
        assert_eq!(counts, vec![3, 3, 4, 4]);
    }

    #[test]
    fn packing_json_shape() {
        let p = Packing {
            metric: Metric::Trace,
            delta: 0.5,
            letters: vec![Letter::Param(vec![0.0]), Letter::Index(2)],
            grid: None,
        };
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v, serde_json::json!({"metric": "trace", "delta": 0.5, "letters": [[0.0], 2]}));
        let back: Packing = serde_json::from_value(v).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn circle_packing_is_separated_and_maximal(delta in 0.2f64..1.4, metric_is_trace: bool) {
            let metric = if metric_is_trace { Metric::Trace } else { Metric::SqrtHs };
            let ch = circle();
            let grid = CandidateGrid::auto(&ch, metric, 1.0, delta).unwrap();
            let set = PointSet::quantum(&ch, grid, metric).unwrap();
            let p = set.packing(delta).unwrap();
            prop_assert!(p.min_distance(&ch).unwrap() >= delta - 1e-12);
            prop_assert!(set.is_maximal(&p).unwrap());
        }

        #[test]
        fn packing_number_nonincreasing_in_delta(a in 0.05f64..1.0, b in 0.05f64..1.0) {
            let (small, large) = if a < b { (a, b) } else { (b, a) };
            let ch = CqChannel::family(Family::MixedSegment).unwrap();
            let grid = CandidateGrid::auto(&ch, Metric::Trace, 1.0, small).unwrap();
            let set = PointSet::quantum(&ch, grid, Metric::Trace).unwrap();
            let idx = set.packing_indices(&[small, large]).unwrap();
            prop_assert!(idx[0].len() >= idx[1].len());
        }
    }
}
