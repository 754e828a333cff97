//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 4 9`.  Criteria listed
//! in `KNOWN_FAILURES` are evaluated at full strictness and reported as FAIL,
//! but do not fail the process; anything else failing does.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qdi::channel::{haar_unitary, CqChannel, DensityMatrix, Family, InputWord, Letter, Povm, ProductState};
use qdi::codes::{assemble_pure, assemble_thm4, entropy_binning, gv_code, hamming_distance, hamming_ball_volume, min_distance_for, BuildOptions, DiCode, GvOptions, Sampling};
use qdi::distinguish::{euclid_sum_check, helstrom, letterwise_sqrt_sum, LogBound};
use qdi::experiment::{Command, Experiment, Overrides};
use qdi::geometry::{estimate_dimension, minkowski_estimate, CandidateGrid, Metric, Mode, PointSet, Schedule};
use qdi::linalg::ComplexMatrix;
use qdi::typicality::typical_projector;
use qdi::verify::{measure_errors, rate_of, ErrorReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Trend criteria that the construction does not meet at desk-scale block lengths.
const KNOWN_FAILURES: &[u32] = &[8, 11];
const CAP: usize = 4096;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() {
    let wanted: BTreeSet<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria = [
        Criterion { id: 1, name: "eigenvalue sandwich and truncation order", limit: Some(secs(60)), run: c1_sandwich },
        Criterion { id: 2, name: "typical mass", limit: None, run: c2_typical_mass },
        Criterion { id: 3, name: "pinching inequality", limit: None, run: c3_pinching },
        Criterion { id: 4, name: "hypothesis-testing bound", limit: Some(secs(300)), run: c4_hypothesis_test },
        Criterion { id: 5, name: "trace distance vs square-root sum", limit: None, run: c5_euclid },
        Criterion { id: 6, name: "greedy Hamming codes", limit: None, run: c6_gv },
        Criterion { id: 7, name: "entropy binning", limit: None, run: c7_binning },
        Criterion { id: 8, name: "pure-state codes on the circle", limit: Some(secs(120)), run: c8_pure },
        Criterion { id: 9, name: "oracle equivalence of error measurement", limit: None, run: c9_oracle },
        Criterion { id: 10, name: "dimension estimator fixtures", limit: None, run: c10_dimension },
        Criterion { id: 11, name: "rate accounting", limit: None, run: c11_rates },
        Criterion { id: 12, name: "measured-classical vs quantum dimension", limit: None, run: c12_sim },
        Criterion { id: 13, name: "determinism", limit: None, run: c13_determinism },
    ];
    let mut unexpected = Vec::new();
    for c in criteria.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let start = Instant::now();
        let result = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("runtime {elapsed:.1?} exceeds {limit:?}")),
            (r, _) => r,
        };
        let known = KNOWN_FAILURES.contains(&c.id);
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(d) if known => ("FAIL", format!("{d} [known]")),
            Err(d) => ("FAIL", d.clone()),
        };
        println!("criterion {:>2} {tag} {} ({:.2} s): {detail}", c.id, c.name, elapsed.as_secs_f64());
        if result.is_err() && !known {
            unexpected.push(c.id);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `U diag(p, 1-p) U^dagger` with a Haar `U`; a quarter of the draws are pure.
fn random_qubit(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let u = haar_unitary(2, rng);
    let p = if rng.gen_bool(0.25) { 1.0 } else { rng.gen_range(0.5..1.0) };
    let d = ComplexMatrix::from_real_diag(&[p, 1.0 - p]);
    DensityMatrix::new(&(&u * &d) * &u.adjoint()).unwrap()
}

fn random_word(n: usize, rng: &mut ChaCha8Rng) -> ProductState {
    ProductState::new((0..n).map(|_| random_qubit(rng)).collect()).unwrap()
}

fn log2_entropy(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&x| x > 1e-300).map(|&x| -x * x.log2()).sum()
}

/// `2 * 2^{-delta^2 / (36 (log2 3)^2)}` for qubits.
fn eta_qubit(delta: f64) -> f64 {
    let k = 3f64.log2().powi(2);
    2.0 * (-delta * delta / (36.0 * k)).exp2()
}

fn min_eig(m: &ComplexMatrix) -> f64 {
    m.herm_eigvals().unwrap().into_iter().fold(f64::INFINITY, f64::min)
}

fn half_trace_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = a - b;
    0.5 * diff.herm_eigvals().unwrap().iter().map(|x| x.abs()).sum::<f64>()
}

fn c1_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_order = f64::INFINITY;
    let mut cases = 0;
    for w in 0..100 {
        let n = if w % 2 == 0 { 4 } else { 6 };
        let word = random_word(n, &mut rng);
        let wm = word.materialize(CAP).unwrap();
        let s = log2_entropy(&wm.herm_eigvals().unwrap());
        for delta in [0.5, 1.0, 2.0] {
            let pi = typical_projector(&word, delta).map_err(|e| e.to_string())?;
            let p = pi.materialize(CAP).unwrap();
            let order = min_eig(&(&wm - &(&(&p * &wm) * &p)));
            worst_order = worst_order.min(order);
            ensure(order >= -1e-10, || format!("word {w} delta {delta}: min eig {order:e}"))?;
            let (lo, hi) = (-s - delta * (n as f64).sqrt(), -s + delta * (n as f64).sqrt());
            for &m in pi.members() {
                let lambda = wm.expectation(&pi.basis_vector(m));
                let l = lambda.log2();
                ensure(l >= lo - 1e-12 && l <= hi + 1e-12, || {
                    format!("word {w} delta {delta}: eigenvalue 2^{l} outside [2^{lo}, 2^{hi}]")
                })?;
            }
            ensure(pi.eigenvalue_sandwich_holds(1e-12), || format!("word {w} delta {delta}: library sandwich"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, worst min eig {worst_order:.3e}"))
}

fn c2_typical_mass() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = f64::INFINITY;
    for w in 0..100 {
        let n = if w % 2 == 0 { 4 } else { 6 };
        let word = random_word(n, &mut rng);
        let wm = word.materialize(CAP).unwrap();
        for delta in [0.5, 1.0, 2.0] {
            let pi = typical_projector(&word, delta).map_err(|e| e.to_string())?;
            let oracle = wm.trace_product(&pi.materialize(CAP).unwrap());
            let mass = pi.typ_mass();
            ensure((mass - oracle).abs() <= 1e-10, || format!("typ_mass {mass} vs trace {oracle}"))?;
            let margin = mass - (1.0 - eta_qubit(delta));
            worst = worst.min(margin);
            ensure(margin >= 0.0, || format!("word {w} delta {delta}: typ_mass {mass} below bound"))?;
        }
    }
    let flat = CqChannel::family(Family::MixedSegment).unwrap();
    for n in [4, 6] {
        let word = flat.word_state(&InputWord(vec![Letter::Param(vec![0.5]); n])).unwrap();
        let pi = typical_projector(&word, (n as f64).sqrt()).unwrap();
        ensure(pi.typ_mass() == 1.0, || format!("flat spectrum n = {n}: typ_mass {}", pi.typ_mass()))?;
    }
    Ok(format!("300 cases, worst margin {worst:.3e}; flat words exact"))
}

fn deltas_for(n: usize) -> Vec<f64> {
    [0.5, 1.0, 2.0].into_iter().filter(|&d| d <= (n as f64).sqrt()).collect()
}

fn c3_pinching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let n = rng.gen_range(1..=6);
        let (x, y) = (random_word(n, &mut rng), random_word(n, &mut rng));
        let ds = deltas_for(n);
        let delta = ds[i % ds.len()];
        let (xm, ym) = (x.materialize(CAP).unwrap(), y.materialize(CAP).unwrap());
        let s = helstrom(&xm, &ym).unwrap().projector;
        let p = typical_projector(&x, delta).unwrap().materialize(CAP).unwrap();
        let comp = &ComplexMatrix::identity(s.dim()) - &s;
        let m = &(&(&(&s * &p) * &s).scale(2.0) + &(&(&comp * &p) * &comp).scale(2.0)) - &p;
        let e = min_eig(&m);
        worst = worst.min(e);
        ensure(e >= -1e-10, || format!("instance {i}: min eig {e:e}"))?;
    }
    Ok(format!("100 instances, worst min eig {worst:.3e}"))
}

fn c4_hypothesis_test() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = f64::INFINITY;
    for i in 0..500 {
        let n = rng.gen_range(1..=6);
        let (x, y) = (random_word(n, &mut rng), random_word(n, &mut rng));
        let ds = deltas_for(n);
        let delta = ds[i % ds.len()];
        let (xm, ym) = (x.materialize(CAP).unwrap(), y.materialize(CAP).unwrap());
        let epsilon = 1.0 - half_trace_norm(&xm, &ym);
        let pi = typical_projector(&x, delta).unwrap();
        let lhs = ym.trace_product(&pi.materialize(CAP).unwrap());
        let library = pi.cross_mass(&y).unwrap();
        ensure((lhs - library).abs() <= 1e-10, || format!("pair {i}: cross_mass {library} vs trace {lhs}"))?;
        let sx = log2_entropy(&xm.herm_eigvals().unwrap());
        let sy = log2_entropy(&ym.herm_eigvals().unwrap());
        let rhs = eta_qubit(delta) + 2.0 * epsilon * (1.0 + (2.0 * delta * (n as f64).sqrt() + sx - sy).exp2());
        worst = worst.min(rhs - lhs);
        ensure(lhs <= rhs + 1e-9, || format!("pair {i}: lhs {lhs} > rhs {rhs}"))?;
    }
    Ok(format!("500 pairs, min margin {worst:.3e}"))
}

fn c5_euclid() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let zero = DensityMatrix::diag(&[1.0, 0.0]).unwrap();
    let one = DensityMatrix::diag(&[0.0, 1.0]).unwrap();
    let (mut infinite, mut worst) = (0, f64::INFINITY);
    for i in 0..1000 {
        let n = rng.gen_range(1..=8);
        let (mut a, mut b): (Vec<_>, Vec<_>) = (0..n).map(|_| (random_qubit(&mut rng), random_qubit(&mut rng))).unzip();
        if i % 25 == 0 {
            let k = rng.gen_range(0..n);
            a[k] = zero.clone();
            b[k] = one.clone();
        }
        let rhs: f64 = 0.25
            * a.iter()
                .zip(&b)
                .map(|(x, y)| (&x.matrix().mat_sqrt().unwrap() - &y.matrix().mat_sqrt().unwrap()).hs_norm().powi(2))
                .sum::<f64>();
        let (x, y) = (ProductState::new(a).unwrap(), ProductState::new(b).unwrap());
        let t = half_trace_norm(&x.materialize(CAP).unwrap(), &y.materialize(CAP).unwrap()).min(1.0);
        // The library check would repeat the tensor decomposition, so its parts are
        // checked against the oracle trace distance instead; small words use it whole.
        let library = letterwise_sqrt_sum(&x, &y).unwrap();
        ensure((library - rhs).abs() <= 1e-10, || format!("pair {i}: library sum {library} vs {rhs}"))?;
        let bound = LogBound::from_trace_distance(t);
        if n <= 5 {
            let check = euclid_sum_check(&x, &y, CAP).unwrap();
            ensure((check.trace_distance - t).abs() <= 1e-12 && check.lhs == bound, || format!("pair {i}: {check:?}"))?;
        }
        if i % 25 == 0 {
            ensure(bound == LogBound::Infinite, || format!("pair {i}: orthogonal pair gave {bound:?}"))?;
            infinite += 1;
            continue;
        }
        let lhs = -(1.0 - t).ln();
        worst = worst.min(lhs - rhs);
        ensure(lhs >= rhs - 1e-9, || format!("pair {i}: -ln(1-T) = {lhs} < {rhs}"))?;
        ensure(bound.at_least(rhs - 1e-9), || format!("pair {i}: library bound {bound:?} below {rhs}"))?;
    }
    Ok(format!("1000 pairs ({infinite} orthogonal), min finite margin {worst:.3e}"))
}

fn c6_gv() -> Outcome {
    let mut codes = 0;
    for q in 2..=5 {
        for n in 1..=6 {
            for t in [0.25, 0.5, 1.0] {
                let code = gv_code(q, n, t, &GvOptions::default()).map_err(|e| e.to_string())?;
                let d = min_distance_for(t, n);
                ensure(d == (t * n as f64).ceil().max(1.0) as usize, || format!("q {q} n {n} t {t}: d = {d}"))?;
                let words: Vec<&[u16]> = code.words.iter().collect();
                for j in 0..words.len() {
                    for k in j + 1..words.len() {
                        let dist = hamming_distance(words[j], words[k]);
                        ensure(dist >= d, || format!("q {q} n {n} t {t}: distance {dist} < {d}"))?;
                    }
                }
                let volume: f64 = (0..d).map(|r| binomial(n, r) * ((q - 1) as f64).powi(r as i32)).sum();
                ensure((volume - hamming_ball_volume(q, n, d - 1)).abs() < 1e-9, || "ball volume".into())?;
                let bound = (q as f64).powi(n as i32) / volume;
                ensure(words.len() as f64 >= bound - 1e-9, || format!("q {q} n {n} t {t}: {} < {bound}", words.len()))?;
                codes += 1;
            }
        }
    }
    let fixture = gv_code(2, 3, 1.0, &GvOptions::default()).unwrap();
    let words: Vec<Vec<u16>> = fixture.words.iter().map(<[u16]>::to_vec).collect();
    ensure(words == vec![vec![0, 0, 0], vec![1, 1, 1]], || format!("fixture gave {words:?}"))?;
    Ok(format!("{codes} exhaustive codes; q=2 n=3 t=1 gives {{000, 111}}"))
}

fn binomial(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn c7_binning() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for trial in 0..40 {
        let channel = if trial % 2 == 0 {
            CqChannel::family(Family::MixedSegment).unwrap()
        } else {
            CqChannel::table((0..6).map(|_| random_qubit(&mut rng)).collect()).unwrap()
        };
        let n = rng.gen_range(1..=8);
        let count: usize = rng.gen_range(1..=300);
        let words: Vec<InputWord> = (0..count).map(|_| channel.random_word(n, &mut rng)).collect();
        let binning = entropy_binning(&words, &channel).map_err(|e| e.to_string())?;
        let bins = n; // ceil(n log2 2)
        ensure(binning.bins == bins, || format!("trial {trial}: {} bins, expected {bins}", binning.bins))?;
        let need = count.div_ceil(bins);
        ensure(binning.selected.len() >= need, || format!("trial {trial}: {} < {need}", binning.selected.len()))?;
        let entropies: Vec<f64> = binning
            .selected
            .iter()
            .map(|&j| {
                words[j]
                    .0
                    .iter()
                    .map(|l| log2_entropy(&channel.evaluate(l).unwrap().matrix().herm_eigvals().unwrap()))
                    .sum()
            })
            .collect();
        let spread = entropies.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - entropies.iter().cloned().fold(f64::INFINITY, f64::min);
        ensure(spread <= 1.0 + 1e-12, || format!("trial {trial}: spread {spread}"))?;
    }
    Ok("40 random word sets".into())
}

fn circle() -> CqChannel {
    CqChannel::family(Family::BlochCircle).unwrap()
}

/// Pure codes on the circle for `n in {4, 6, 8, 10}` with `gamma = 1/2`, `t = 1/4`.
fn pure_sweep() -> &'static Vec<(DiCode, ErrorReport)> {
    static SWEEP: OnceLock<Vec<(DiCode, ErrorReport)>> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let channel = circle();
        let opts = BuildOptions {
            gv: GvOptions {
                sampling: Some(Sampling { seed: 1, draws: 20_000 }),
                ..GvOptions::default()
            },
        };
        [4, 6, 8, 10]
            .into_iter()
            .map(|n| {
                let code = assemble_pure(&channel, n, 0.5, 0.25, &opts).unwrap();
                let report = measure_errors(&code, &channel).unwrap();
                (code, report)
            })
            .collect()
    })
}

fn c8_pure() -> Outcome {
    let mut detail = Vec::new();
    let mut failures = Vec::new();
    let mut previous = f64::INFINITY;
    for (code, r) in pure_sweep() {
        let n = code.n();
        let bound = (-(n as f64).sqrt() * 0.25 / 4.0).exp2();
        detail.push(format!("n={n} N={} l1={:.1e} l2={:.4} bound={bound:.4}", code.len(), r.lambda1, r.lambda2));
        if r.lambda1 > 1e-12 {
            failures.push(format!("n = {n}: lambda1 {:e}", r.lambda1));
        }
        if r.lambda2 > bound + 1e-12 {
            failures.push(format!("n = {n}: lambda2 {} above bound {bound}", r.lambda2));
        }
        if r.lambda2 > previous {
            failures.push(format!("n = {n}: lambda2 rose from {previous:.4} to {:.4}", r.lambda2));
        }
        previous = r.lambda2;
    }
    let detail = detail.join("; ");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

/// `(lambda1, lambda2)` from materialized tensors and decoder operators.
fn tensor_errors(states: &[ComplexMatrix], decoders: &[ComplexMatrix]) -> (f64, f64) {
    let (mut l1, mut l2) = (0.0f64, 0.0f64);
    for (j, e) in decoders.iter().enumerate() {
        for (k, w) in states.iter().enumerate() {
            let v = w.trace_product(e);
            if j == k {
                l1 = l1.max(1.0 - v);
            } else {
                l2 = l2.max(v);
            }
        }
    }
    (l1, l2)
}

fn c9_oracle() -> Outcome {
    let mut checked = Vec::new();
    let opts = BuildOptions::default();
    let typical_cases = [
        (CqChannel::family(Family::MixedSegment).unwrap(), 4usize),
        (CqChannel::family(Family::BlochCap { max_polar: std::f64::consts::FRAC_PI_4 }).unwrap(), 3),
        (CqChannel::family(Family::MixedSegment).unwrap(), 6),
    ];
    for (channel, n) in &typical_cases {
        let code = assemble_thm4(channel, *n, 0.25, 0.25, (*n as f64).sqrt() / 2.0, &opts).map_err(|e| e.to_string())?;
        let report = measure_errors(&code, channel).map_err(|e| e.to_string())?;
        let states: Vec<ComplexMatrix> = code.word_states(channel).unwrap().iter().map(|s| s.materialize(CAP).unwrap()).collect();
        let qdi::codes::Decoder::TypicalProjector { delta } = code.decoder else {
            return Err("expected a typical decoder".into());
        };
        let decoders: Vec<ComplexMatrix> = code
            .word_states(channel)
            .unwrap()
            .iter()
            .map(|s| typical_projector(s, delta).unwrap().materialize(CAP).unwrap())
            .collect();
        let (l1, l2) = tensor_errors(&states, &decoders);
        ensure((l1 - report.lambda1).abs() <= 1e-10 && (l2 - report.lambda2).abs() <= 1e-10, || {
            format!("typical n = {n}: ({l1}, {l2}) vs ({}, {})", report.lambda1, report.lambda2)
        })?;
        checked.push(format!("typical n={n} N={}", code.len()));
    }
    let pure_cases = [(4usize, 0.25), (6, 1.0)];
    for (n, t) in pure_cases {
        let channel = circle();
        let code = assemble_pure(&channel, n, 0.5, t, &opts).map_err(|e| e.to_string())?;
        let report = measure_errors(&code, &channel).map_err(|e| e.to_string())?;
        let states: Vec<ComplexMatrix> = code.word_states(&channel).unwrap().iter().map(|s| s.materialize(CAP).unwrap()).collect();
        let (l1, l2) = tensor_errors(&states, &states);
        ensure((l1 - report.lambda1).abs() <= 1e-10 && (l2 - report.lambda2).abs() <= 1e-10, || {
            format!("pure n = {n}: ({l1}, {l2}) vs ({}, {})", report.lambda1, report.lambda2)
        })?;
        checked.push(format!("pure n={n} N={}", code.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for i in 0..60 {
        let n = rng.gen_range(1..=6);
        let (x, y) = (random_word(n, &mut rng), random_word(n, &mut rng));
        let ds = deltas_for(n);
        let pi = typical_projector(&x, ds[i % ds.len()]).unwrap();
        let oracle = y.materialize(CAP).unwrap().trace_product(&pi.materialize(CAP).unwrap());
        let got = pi.cross_mass(&y).unwrap();
        ensure((oracle - got).abs() <= 1e-10, || format!("cross_mass pair {i}: {got} vs {oracle}"))?;
    }
    checked.push("60 cross_mass pairs".into());
    Ok(checked.join(", "))
}

fn c10_dimension() -> Outcome {
    let default = Schedule::default();
    let cantor_schedule = Schedule {
        delta0: 0.3,
        ratio: 1.0 / 3.0,
        steps: 6,
        ..Schedule::default()
    };
    let single = CqChannel::table(vec![DensityMatrix::diag(&[0.7, 0.3]).unwrap()]).unwrap();
    let cases: [(&str, CqChannel, &Schedule, f64, f64); 4] = [
        ("circle", circle(), &default, 1.0, 0.10),
        ("cantor", CqChannel::family(Family::CantorCircle { depth: 9 }).unwrap(), &cantor_schedule, 2f64.ln() / 3f64.ln(), 0.06),
        ("point", single, &default, 0.0, 1e-12),
        ("segment", CqChannel::family(Family::MixedSegment).unwrap(), &default, 1.0, 0.10),
    ];
    let mut detail = Vec::new();
    for (name, channel, schedule, want, tol) in cases {
        for metric in [Metric::SqrtHs, Metric::Trace] {
            let start = Instant::now();
            let est = estimate_dimension(&channel, metric, schedule, Mode::Liminf).map_err(|e| e.to_string())?;
            let took = start.elapsed();
            ensure((est.lower - want).abs() <= tol, || {
                format!("{name} {metric:?}: lower {:.4}, expected {want:.4} +- {tol}", est.lower)
            })?;
            ensure(took < secs(60), || format!("{name} {metric:?}: {took:?}"))?;
            detail.push(format!("{name}/{metric:?} {:.4}", est.lower));
        }
    }
    Ok(detail.join(", "))
}

fn circle_dimension() -> f64 {
    estimate_dimension(&circle(), Metric::SqrtHs, &Schedule::default(), Mode::Liminf)
        .unwrap()
        .lower
}

fn c11_rates() -> Outcome {
    let d_hat = circle_dimension();
    let ceiling = 0.5 * d_hat + 0.05;
    let mut detail = Vec::new();
    let mut failures = Vec::new();
    for (code, _) in pure_sweep() {
        let n = code.n();
        let rate = rate_of(code.len(), n).map_err(|e| e.to_string())?;
        detail.push(format!("n={n} rate={rate:.4}"));
        if !(rate > 0.0 && rate <= ceiling) {
            failures.push(format!("n = {n}: rate {rate:.4} outside (0, {ceiling:.4}]"));
        }
    }
    let detail = format!(
        "{}; d={d_hat:.4}, quarter={:.4}, half={:.4}",
        detail.join(", "),
        0.25 * d_hat,
        0.5 * d_hat
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

fn c12_sim() -> Outcome {
    let schedule = Schedule {
        delta0: 0.5,
        ratio: 0.5,
        steps: 6,
        ..Schedule::default()
    };
    let mut detail = Vec::new();
    for (name, channel) in [("circle", circle()), ("segment", CqChannel::family(Family::MixedSegment).unwrap())] {
        let grid = CandidateGrid::auto(&channel, Metric::SqrtHs, 1.0, schedule.finest()).map_err(|e| e.to_string())?;
        let quantum = minkowski_estimate(&PointSet::quantum(&channel, grid.clone(), Metric::SqrtHs).unwrap(), &schedule, Mode::Liminf)
            .unwrap()
            .lower;
        let mut rng = ChaCha8Rng::seed_from_u64(1212);
        let mut povms = vec![Povm::trivial(2), Povm::computational(2)];
        for i in 0..8 {
            povms.push(if i % 2 == 0 {
                Povm::random_basis(2, &mut rng)
            } else {
                Povm::random_splitting(2, 3, &mut rng)
            });
        }
        let mut worst = f64::NEG_INFINITY;
        for (i, povm) in povms.iter().enumerate() {
            let set = PointSet::classical(&channel, povm, grid.clone()).map_err(|e| e.to_string())?;
            let classical = minkowski_estimate(&set, &schedule, Mode::Liminf).unwrap().lower;
            worst = worst.max(classical);
            ensure(classical <= quantum + 0.15, || {
                format!("{name} povm {i}: classical {classical:.4} > quantum {quantum:.4} + 0.15")
            })?;
        }
        detail.push(format!("{name}: quantum {quantum:.4}, max classical {worst:.4}"));
    }
    Ok(detail.join("; "))
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn c13_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = serde_json::json!({
        "experiment": "determinism",
        "channel": {"family": "bloch_circle"},
        "seed": 5,
        "schedule": {"delta0": 0.5, "ratio": 0.5, "steps": 5},
        "pipeline": {"kind": "pure", "n": [4, 6], "gamma": 0.5, "t": 0.25},
        "lemma2": {"pairs": 20, "n_max": 5},
        "sim": {"povms": 4}
    });
    let mut runs = Vec::new();
    for command in [Command::Dimension, Command::Build, Command::CheckLemma2, Command::Sweep, Command::SimCompare] {
        runs.push((format!("{command:?}"), base.clone(), command));
    }
    let code_path = tmp.path().join("code_source");
    let mut verify = base.clone();
    verify["verify"] = serde_json::json!({"code": code_path.join("code_n4.json")});
    runs.push(("Verify".into(), verify, Command::Verify));
    // A code for `verify` to load.
    let cfg = serde_json::from_value(base.clone()).unwrap();
    Experiment::from_config(cfg, tmp.path().into(), &Overrides { out: Some(code_path.clone()), ..Overrides::default() })
        .unwrap()
        .run(Command::Build)
        .map_err(|e| e.to_string())?;
    let mut total = 0;
    for (name, json, command) in runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = tmp.path().join(format!("{name}_{rep}"));
            let cfg = serde_json::from_value(json.clone()).map_err(|e| e.to_string())?;
            let exp = Experiment::from_config(cfg, tmp.path().into(), &Overrides { out: Some(out.clone()), ..Overrides::default() })
                .map_err(|e| e.to_string())?;
            exp.run(command).map_err(|e| format!("{name}: {e}"))?;
            outputs.push(read_dir_bytes(&out));
        }
        ensure(!outputs[0].is_empty(), || format!("{name}: no output files"))?;
        ensure(outputs[0] == outputs[1], || format!("{name}: outputs differ between runs"))?;
        total += outputs[0].len();
    }
    let bin = env!("CARGO_BIN_EXE_qdi");
    let config = tmp.path().join("dimension.json");
    std::fs::write(&config, serde_json::to_string(&base).unwrap()).unwrap();
    let mut cli = Vec::new();
    for rep in 0..2 {
        let out = tmp.path().join(format!("cli_{rep}"));
        let status = std::process::Command::new(bin)
            .args(["dimension", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--seed", "5"])
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), || format!("cli exit {status}"))?;
        cli.push(read_dir_bytes(&out));
    }
    ensure(cli[0] == cli[1], || "cli outputs differ".into())?;
    Ok(format!("6 commands, {total} files byte-identical across runs; binary runs identical"))
}
