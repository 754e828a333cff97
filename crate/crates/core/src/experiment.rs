//! Configuration-driven experiment runner behind the `qdi` binary.
//!
//! A run reads a JSON [`ExperimentConfig`], applies command-line overrides,
//! and writes CSV/JSON artifacts into the output directory.  Every artifact
//! carries the SHA-256 of the effective configuration, the seed and the crate
//! version; floats are written with 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelSpec, CqChannel, Povm};
use crate::codes::{assemble_pure, assemble_thm4, BuildOptions, DiCode, GvOptions, Provenance, Sampling};
use crate::distinguish::{lemma2_rhs, product_trace_distance};
use crate::error::Error;
use crate::geometry::{estimate_dimension, minkowski_estimate, CandidateGrid, DimensionEstimate, Metric, Mode, PointSet, Schedule};
use crate::linalg::DEFAULT_DIM_CAP;
use crate::typicality::{max_delta, typical_projector, DEFAULT_ENUMERATION_CAP};
use crate::verify::{check_thm3, check_thm5, lemma2_recheck, measure_errors, rate_of, ErrorReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Hypothesis-testing margins below this count as failures.
pub const MARGIN_TOL: f64 = 1e-9;
/// Sampled codes record their minimum distance check only up to this many pairs.
const MIN_DISTANCE_CHECK_PAIRS: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Largest tensor dimension materialized for exact trace norms.
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma2: Option<Lemma2Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

fn default_cap() -> usize {
    DEFAULT_DIM_CAP
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::SqrtHs]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    /// Entropy-typical decoders on a certified packing.
    Typical,
    /// Pure-state decoders `E_j = W_{u_j}`.
    Pure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub kind: PipelineKind,
    pub n: Vec<usize>,
    #[serde(default = "default_t")]
    pub t: f64,
    /// Typical pipeline only; default 1/4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Typical pipeline only; default `sqrt(n) / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Pure pipeline only; default 1/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Largest word space enumerated exactly by the Hamming-code greedy.
    #[serde(default = "default_gv_cap")]
    pub gv_cap: u64,
    /// Random draws for the sampled greedy above `gv_cap`; absent means the
    /// cap is a hard limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_draws: Option<usize>,
}

fn default_t() -> f64 {
    0.25
}

fn default_gv_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma2Config {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
}

fn default_pairs() -> usize {
    100
}
fn default_n_max() -> usize {
    6
}
fn default_deltas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Number of random POVMs.
    #[serde(default = "default_povms")]
    pub povms: usize,
    /// Outcomes of the random splitting POVMs.
    #[serde(default = "default_outcomes")]
    pub outcomes: usize,
    /// Also compare the trivial and computational-basis POVMs.
    #[serde(default = "default_true")]
    pub include_fixed: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_povms() -> usize {
    8
}
fn default_outcomes() -> usize {
    3
}
fn default_true() -> bool {
    true
}
fn default_tolerance() -> f64 {
    0.15
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Code file written by `build`; relative paths resolve against the config file.
    pub code: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Dimension,
    Build,
    Verify,
    CheckLemma2,
    Sweep,
    SimCompare,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub cap: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("internal check failed: {0}")]
    CheckFailed(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 1,
            RunError::Infeasible(_) => 2,
            RunError::CheckFailed(_) => 3,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::PremiseNotCertified(_) => RunError::Infeasible(e.to_string()),
            _ => RunError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Validation(format!("io error: {e}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Infeasible = 2,
    CheckFailed = 3,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            status: Status::Ok,
            files: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn raise(&mut self, status: Status, note: String) {
        self.status = self.status.max(status);
        self.notes.push(note);
    }

    pub fn exit_code(&self) -> i32 {
        self.status as i32
    }
}

/// A loaded, validated configuration with overrides applied.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub config_dir: PathBuf,
    pub out_dir: PathBuf,
    pub provenance: Provenance,
}

impl Experiment {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        let config = parse_config(&text).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_config(config, dir, overrides)
    }

    pub fn from_config(mut config: ExperimentConfig, config_dir: PathBuf, overrides: &Overrides) -> Result<Self, RunError> {
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(cap) = overrides.cap {
            config.cap = cap;
        }
        if let ChannelSpec::File { file } = &config.channel {
            let p = Path::new(file);
            if p.is_relative() {
                config.channel = ChannelSpec::File {
                    file: config_dir.join(p).to_string_lossy().into_owned(),
                };
            }
        }
        let out_dir = match (&overrides.out, &config.out) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => config_dir.join(o),
            (None, None) => config_dir.join("results"),
        };
        validate(&config)?;
        let provenance = Provenance {
            config_hash: config_hash(&config),
            seed: config.seed,
            version: VERSION.to_string(),
        };
        Ok(Experiment {
            config,
            config_dir,
            out_dir,
            provenance,
        })
    }

    fn channel(&self) -> Result<CqChannel, RunError> {
        Ok(self.config.channel.build()?)
    }

    fn header(&self) -> String {
        format!(
            "# experiment={} config_hash={} seed={} version={}\n",
            self.config.experiment, self.provenance.config_hash, self.provenance.seed, self.provenance.version
        )
    }

    fn write(&self, name: &str, contents: &str, outcome: &mut Outcome) -> Result<(), RunError> {
        fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        outcome.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&self, name: &str, body: &T, outcome: &mut Outcome) -> Result<(), RunError> {
        let wrapped = serde_json::json!({
            "provenance": &self.provenance,
            "experiment": &self.config.experiment,
            "result": body,
        });
        let text = serde_json::to_string_pretty(&wrapped).map_err(|e| RunError::Validation(e.to_string()))?;
        self.write(name, &(text + "\n"), outcome)
    }

    fn csv(&self, columns: &[&str]) -> String {
        let mut s = self.header();
        s.push_str(&columns.join(","));
        s.push('\n');
        s
    }

    pub fn run(&self, command: Command) -> Result<Outcome, RunError> {
        match command {
            Command::Dimension => self.cmd_dimension(),
            Command::Build => self.cmd_build(),
            Command::Verify => self.cmd_verify(),
            Command::CheckLemma2 => self.cmd_check_lemma2(),
            Command::Sweep => self.cmd_sweep(),
            Command::SimCompare => self.cmd_sim_compare(),
        }
    }

    fn pipeline(&self) -> Result<&PipelineConfig, RunError> {
        self.config
            .pipeline
            .as_ref()
            .ok_or_else(|| RunError::Validation("config has no `pipeline` section".into()))
    }

    fn build_options(&self, p: &PipelineConfig) -> BuildOptions {
        BuildOptions {
            gv: GvOptions {
                cap: p.gv_cap as u128,
                sampling: p.sample_draws.map(|draws| Sampling {
                    seed: self.config.seed,
                    draws,
                }),
            },
        }
    }

    fn build_code(&self, channel: &CqChannel, p: &PipelineConfig, n: usize) -> Result<DiCode, RunError> {
        let opts = self.build_options(p);
        let mut code = match p.kind {
            PipelineKind::Pure => assemble_pure(channel, n, p.gamma.unwrap_or(0.5), p.t, &opts)?,
            PipelineKind::Typical => {
                let delta = p.delta.unwrap_or((n as f64).sqrt() / 2.0);
                assemble_thm4(channel, n, p.alpha.unwrap_or(0.25), p.t, delta, &opts)?
            }
        };
        code.provenance = Some(self.provenance.clone());
        Ok(code)
    }

    pub fn cmd_dimension(&self) -> Result<Outcome, RunError> {
        let mut outcome = Outcome::new();
        let channel = self.channel()?;
        let mut csv = self.csv(&["metric", "k", "scale", "raw_count", "count", "slope"]);
        let mut estimates = Vec::new();
        for &metric in &self.config.metrics {
            let est = estimate_dimension(&channel, metric, &self.config.schedule, Mode::Liminf)?;
            for k in 0..est.scales.len() {
                let slope = if k == 0 { String::new() } else { fmt_f(est.slopes[k - 1]) };
                let _ = writeln!(
                    csv,
                    "{},{k},{},{},{},{slope}",
                    metric_name(metric),
                    fmt_f(est.scales[k]),
                    est.raw_counts[k],
                    est.counts[k]
                );
            }
            outcome.notes.push(format!(
                "{}: lower {:.4} upper {:.4}{}",
                metric_name(metric),
                est.lower,
                est.upper,
                if est.flat { " (flat set)" } else { "" }
            ));
            estimates.push(DimensionSummary::from(est));
        }
        self.write("dimension.csv", &csv, &mut outcome)?;
        self.write_json("dimension.json", &estimates, &mut outcome)?;
        Ok(outcome)
    }

    pub fn cmd_build(&self) -> Result<Outcome, RunError> {
        let mut outcome = Outcome::new();
        let p = self.pipeline()?;
        let channel = self.channel()?;
        let mut csv = self.csv(&[
            "n",
            "kind",
            "alphabet",
            "min_dist",
            "codewords",
            "lambda1",
            "lambda2",
            "claimed_lambda1",
            "claimed_lambda2",
            "vacuous",
            "certified",
        ]);
        for &n in &p.n {
            let mut code = self.build_code(&channel, p, n)?;
            let report = measure_errors(&code, &channel)?;
            self.internal_checks(&code, &channel, &report, &mut outcome)?;
            code.measured = Some(report.clone());
            let certified = code.certification.as_ref().is_none_or(|c| c.feasible);
            if !certified {
                let cert = code.certification.clone().expect("typical codes carry a certification");
                outcome.raise(
                    Status::Infeasible,
                    format!(
                        "n = {n}: separation premise not certified (exponent {:?} bits, required {} bits)",
                        cert.min_exponent_bits, cert.required_bits
                    ),
                );
                let report_body = InfeasibilityReport {
                    n,
                    params: code.params.clone(),
                    certification: cert,
                    measured: report.clone(),
                    claimed: code.claimed,
                };
                self.write_json(&format!("infeasible_n{n}.json"), &report_body, &mut outcome)?;
            }
            let _ = writeln!(
                csv,
                "{n},{},{},{},{},{},{},{},{},{},{}",
                kind_name(p.kind),
                code.alphabet.len(),
                code.params.min_dist,
                code.len(),
                fmt_f(report.lambda1),
                fmt_f(report.lambda2),
                fmt_f(code.claimed.lambda1),
                fmt_f(code.claimed.lambda2),
                code.claimed.vacuous,
                certified
            );
            let text = serde_json::to_string(&code).map_err(|e| RunError::Validation(e.to_string()))?;
            self.write(&format!("code_n{n}.json"), &(text + "\n"), &mut outcome)?;
        }
        self.write("build.csv", &csv, &mut outcome)?;
        Ok(outcome)
    }

    fn internal_checks(&self, code: &DiCode, channel: &CqChannel, report: &ErrorReport, outcome: &mut Outcome) -> Result<(), RunError> {
        let n = code.n();
        let pairs = (code.len() as u128).pow(2);
        if pairs <= MIN_DISTANCE_CHECK_PAIRS {
            for j in 0..code.len() {
                for k in j + 1..code.len() {
                    let d = crate::codes::hamming_distance(code.codewords.get(j), code.codewords.get(k));
                    if d < code.params.min_dist {
                        outcome.raise(Status::CheckFailed, format!("n = {n}: codewords {j}, {k} at distance {d}"));
                        return Ok(());
                    }
                }
            }
        }
        match code.decoder {
            crate::codes::Decoder::PureProjector => {
                let c = check_thm5(code, report)?;
                if !c.pass {
                    outcome.raise(Status::CheckFailed, format!("n = {n}: pure-decoder bounds violated: {c:?}"));
                }
            }
            crate::codes::Decoder::TypicalProjector { .. } => {
                if code.certification.as_ref().is_some_and(|c| c.feasible) {
                    let c = check_thm3(code, report, channel.output_dim())?;
                    if !c.pass {
                        outcome.raise(Status::CheckFailed, format!("n = {n}: typical-decoder bounds violated: {c:?}"));
                    }
                    if code.len() <= crate::codes::MAX_CERTIFIED_SCAN {
                        let l2 = lemma2_recheck(code, channel)?;
                        if !l2.pass {
                            outcome.raise(Status::CheckFailed, format!("n = {n}: hypothesis-testing bound violated: {l2:?}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn cmd_verify(&self) -> Result<Outcome, RunError> {
        let mut outcome = Outcome::new();
        let v = self
            .config
            .verify
            .as_ref()
            .ok_or_else(|| RunError::Validation("config has no `verify` section".into()))?;
        let path = self.config_dir.join(&v.code);
        let text = fs::read_to_string(&path).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        let code: DiCode = serde_json::from_str(&text).map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        let channel = code.channel()?;
        let report = measure_errors(&code, &channel)?;
        if let Some(stored) = &code.measured {
            let drift = (stored.lambda1 - report.lambda1).abs().max((stored.lambda2 - report.lambda2).abs());
            if drift > 1e-12 {
                outcome.raise(Status::CheckFailed, format!("stored errors differ from recomputed by {drift:e}"));
            }
        }
        let body = match code.decoder {
            crate::codes::Decoder::PureProjector => {
                let c = check_thm5(&code, &report)?;
                if !c.pass {
                    outcome.raise(Status::CheckFailed, format!("pure-decoder bounds violated: {c:?}"));
                }
                serde_json::json!({ "measured": report, "pure_bounds": c })
            }
            crate::codes::Decoder::TypicalProjector { .. } => match check_thm3(&code, &report, channel.output_dim()) {
                Ok(c) => {
                    if !c.pass {
                        outcome.raise(Status::CheckFailed, format!("typical-decoder bounds violated: {c:?}"));
                    }
                    serde_json::json!({ "measured": report, "typical_bounds": c })
                }
                Err(Error::PremiseNotCertified(msg)) => {
                    outcome.raise(Status::Infeasible, msg.clone());
                    serde_json::json!({ "measured": report, "premise_not_certified": msg })
                }
                Err(e) => return Err(e.into()),
            },
        };
        self.write_json("verify.json", &body, &mut outcome)?;
        Ok(outcome)
    }

    pub fn cmd_check_lemma2(&self) -> Result<Outcome, RunError> {
        let mut outcome = Outcome::new();
        let cfg = self
            .config
            .lemma2
            .clone()
            .ok_or_else(|| RunError::Validation("config has no `lemma2` section".into()))?;
        let channel = self.channel()?;
        let d = channel.output_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut csv = self.csv(&["pair", "n", "delta", "epsilon", "lhs", "rhs", "margin"]);
        let mut min_margin = f64::INFINITY;
        for pair in 0..cfg.pairs {
            let delta = cfg.deltas[pair % cfg.deltas.len()];
            let n_min = smallest_n_for(delta, d);
            let n = rand::Rng::gen_range(&mut rng, n_min..=cfg.n_max);
            let x = channel.word_state(&channel.random_word(n, &mut rng))?;
            let xp = channel.word_state(&channel.random_word(n, &mut rng))?;
            let epsilon = 1.0 - product_trace_distance(&x, &xp, self.config.cap)?;
            let pi = typical_projector(&x, delta)?;
            let lhs = pi.cross_mass(&xp)?;
            let rhs = lemma2_rhs(epsilon, delta, n, x.entropy(), xp.entropy(), d);
            let margin = rhs - lhs;
            min_margin = min_margin.min(margin);
            let _ = writeln!(
                csv,
                "{pair},{n},{},{},{},{},{}",
                fmt_f(delta),
                fmt_f(epsilon),
                fmt_f(lhs),
                fmt_f(rhs),
                fmt_f(margin)
            );
        }
        if min_margin < -MARGIN_TOL {
            outcome.raise(Status::CheckFailed, format!("hypothesis-testing bound violated, margin {min_margin:e}"));
        }
        outcome.notes.push(format!("{} pairs, min margin {min_margin:.6e}", cfg.pairs));
        self.write("lemma2.csv", &csv, &mut outcome)?;
        self.write_json(
            "lemma2.json",
            &serde_json::json!({ "pairs": cfg.pairs, "min_margin": min_margin, "pass": min_margin >= -MARGIN_TOL }),
            &mut outcome,
        )?;
        Ok(outcome)
    }

    pub fn cmd_sweep(&self) -> Result<Outcome, RunError> {
        let mut outcome = Outcome::new();
        let p = self.pipeline()?;
        if let Some(&n) = p.n.iter().find(|&&n| n < 2) {
            return Err(RunError::Validation(format!("sweep needs n >= 2 for rates, got {n}")));
        }
        let channel = self.channel()?;
        let est = estimate_dimension(&channel, Metric::SqrtHs, &self.config.schedule, Mode::Liminf)?;
        let d_hat = est.lower;
        let mut csv = self.csv(&[
            "n",
            "alphabet",
            "min_dist",
            "codewords",
            "sampled",
            "rate",
            "quarter_d",
            "half_d",
            "in_window",
            "lambda1",
            "lambda2",
            "claimed_lambda2",
        ]);
        let mut rows = Vec::new();
        for &n in &p.n {
            let code = self.build_code(&channel, p, n)?;
            let report = measure_errors(&code, &channel)?;
            let rate = rate_of(code.len(), n)?;
            let in_window = (code.len() == 1 || rate > 0.0) && rate <= 0.5 * d_hat + 0.05;
            let _ = writeln!(
                csv,
                "{n},{},{},{},{},{},{},{},{in_window},{},{},{}",
                code.alphabet.len(),
                code.params.min_dist,
                code.len(),
                code.params.hamming_sampled,
                fmt_f(rate),
                fmt_f(0.25 * d_hat),
                fmt_f(0.5 * d_hat),
                fmt_f(report.lambda1),
                fmt_f(report.lambda2),
                fmt_f(code.claimed.lambda2)
            );
            rows.push(serde_json::json!({
                "n": n, "codewords": code.len(), "rate": rate, "in_window": in_window,
                "lambda1": report.lambda1, "lambda2": report.lambda2,
            }));
        }
        self.write("sweep.csv", &csv, &mut outcome)?;
        self.write_json(
            "sweep.json",
            &serde_json::json!({
                "dimension_lower": d_hat,
                "quarter_d": 0.25 * d_hat,
                "half_d": 0.5 * d_hat,
                "pure_outputs": channel.is_pure_output(),
                "rows": rows,
            }),
            &mut outcome,
        )?;
        Ok(outcome)
    }

    pub fn cmd_sim_compare(&self) -> Result<Outcome, RunError> {
        let mut outcome = Outcome::new();
        let sim = self
            .config
            .sim
            .clone()
            .ok_or_else(|| RunError::Validation("config has no `sim` section".into()))?;
        let channel = self.channel()?;
        let d = channel.output_dim();
        let schedule = &self.config.schedule;
        let grid = CandidateGrid::auto(&channel, Metric::SqrtHs, 1.0, schedule.finest())?;
        let quantum = minkowski_estimate(&PointSet::quantum(&channel, grid.clone(), Metric::SqrtHs)?, schedule, Mode::Liminf)?;
        let mut povms: Vec<(String, Povm)> = Vec::new();
        if sim.include_fixed {
            povms.push(("trivial".into(), Povm::trivial(d)));
            povms.push(("computational".into(), Povm::computational(d)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        for i in 0..sim.povms {
            if i % 2 == 0 {
                povms.push(("haar_basis".into(), Povm::random_basis(d, &mut rng)));
            } else {
                povms.push(("haar_splitting".into(), Povm::random_splitting(d, sim.outcomes, &mut rng)));
            }
        }
        let mut csv = self.csv(&[
            "povm",
            "kind",
            "outcomes",
            "classical_lower",
            "classical_upper",
            "quantum_lower",
            "excess",
            "within_tolerance",
        ]);
        let mut max_classical = f64::NEG_INFINITY;
        let mut all_within = true;
        for (id, (kind, povm)) in povms.iter().enumerate() {
            let set = PointSet::classical(&channel, povm, grid.clone())?;
            let est = minkowski_estimate(&set, schedule, Mode::Liminf)?;
            let excess = est.lower - quantum.lower;
            let within = excess <= sim.tolerance;
            all_within &= within;
            max_classical = max_classical.max(est.lower);
            let _ = writeln!(
                csv,
                "{id},{kind},{},{},{},{},{},{within}",
                povm.effects().len(),
                fmt_f(est.lower),
                fmt_f(est.upper),
                fmt_f(quantum.lower),
                fmt_f(excess)
            );
        }
        outcome.notes.push(format!(
            "HEURISTIC: quantum {:.4}, max classical {:.4} over {} POVMs",
            quantum.lower,
            max_classical,
            povms.len()
        ));
        self.write("sim_compare.csv", &csv, &mut outcome)?;
        self.write_json(
            "sim_compare.json",
            &serde_json::json!({
                "label": "HEURISTIC",
                "quantum_lower": quantum.lower,
                "max_classical_lower": max_classical,
                "povms": povms.len(),
                "tolerance": sim.tolerance,
                "all_within_tolerance": all_within,
            }),
            &mut outcome,
        )?;
        Ok(outcome)
    }
}

/// Parses a configuration, also rejecting unknown keys on parameterless families.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, String> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let config: ExperimentConfig = serde_json::from_value(raw.clone()).map_err(|e| e.to_string())?;
    if let (Some(serde_json::Value::Object(given)), ChannelSpec::Family(f)) = (raw.get("channel"), &config.channel) {
        let known = serde_json::to_value(f).map_err(|e| e.to_string())?;
        if let Some(key) = given.keys().find(|k| known.get(k.as_str()).is_none()) {
            return Err(format!("unknown field `{key}` in channel"));
        }
    }
    Ok(config)
}

/// Smallest `n >= 1` with `delta <= sqrt(n) log2 d`.
fn smallest_n_for(delta: f64, d: usize) -> usize {
    let mut n = 1;
    while max_delta(n, d) + 1e-12 < delta {
        n += 1;
    }
    n
}

fn validate(c: &ExperimentConfig) -> Result<(), RunError> {
    let bad = |m: String| Err(RunError::Validation(m));
    if c.experiment.is_empty() {
        return bad("experiment id must be nonempty".into());
    }
    if c.cap == 0 {
        return bad("cap must be positive".into());
    }
    if c.metrics.is_empty() {
        return bad("metrics must be nonempty".into());
    }
    c.schedule.validate()?;
    if let Some(p) = &c.pipeline {
        if p.n.is_empty() {
            return bad("pipeline.n must list at least one block length".into());
        }
        if p.n.contains(&0) {
            return bad("block lengths must be positive".into());
        }
        if !(p.t > 0.0 && p.t <= 1.0) {
            return bad(format!("pipeline.t = {} must lie in (0, 1]", p.t));
        }
        match p.kind {
            PipelineKind::Typical => {
                let alpha = p.alpha.unwrap_or(0.25);
                if !(alpha > 0.0 && alpha <= 0.25) {
                    return bad(format!("pipeline.alpha = {alpha} must lie in (0, 1/4]"));
                }
                if p.gamma.is_some() {
                    return bad("pipeline.gamma applies to the pure pipeline only".into());
                }
            }
            PipelineKind::Pure => {
                let gamma = p.gamma.unwrap_or(0.5);
                if !(gamma > 0.0 && gamma < 1.0) {
                    return bad(format!("pipeline.gamma = {gamma} must lie in (0, 1)"));
                }
                if p.alpha.is_some() || p.delta.is_some() {
                    return bad("pipeline.alpha and pipeline.delta apply to the typical pipeline only".into());
                }
            }
        }
    }
    if let Some(l) = &c.lemma2 {
        if l.deltas.is_empty() || l.deltas.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return bad("lemma2.deltas must be a nonempty list of positive numbers".into());
        }
        if l.n_max == 0 {
            return bad("lemma2.n_max must be positive".into());
        }
    }
    if let Some(s) = &c.sim {
        if s.outcomes == 0 {
            return bad("sim.outcomes must be positive".into());
        }
        if s.tolerance.is_nan() || s.tolerance < 0.0 {
            return bad("sim.tolerance must be nonnegative".into());
        }
    }
    Ok(())
}

/// SHA-256 of the effective configuration, output directory excluded.
pub fn config_hash(c: &ExperimentConfig) -> String {
    let mut c = c.clone();
    c.out = None;
    let text = serde_json::to_string(&c).expect("config serializes");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn metric_name(m: Metric) -> &'static str {
    match m {
        Metric::SqrtHs => "sqrt_hs",
        Metric::Trace => "trace",
    }
}

fn kind_name(k: PipelineKind) -> &'static str {
    match k {
        PipelineKind::Typical => "typical",
        PipelineKind::Pure => "pure",
    }
}

#[derive(Clone, Debug, Serialize)]
struct DimensionSummary {
    metric: Metric,
    liminf: f64,
    limsup: f64,
    flat: bool,
    tail_len: usize,
    prefactor: Option<f64>,
    scales: Vec<f64>,
    raw_counts: Vec<usize>,
    counts: Vec<usize>,
    slopes: Vec<f64>,
    grid: CandidateGrid,
}

impl From<DimensionEstimate> for DimensionSummary {
    fn from(e: DimensionEstimate) -> Self {
        DimensionSummary {
            metric: e.metric,
            liminf: e.lower,
            limsup: e.upper,
            flat: e.flat,
            tail_len: e.tail_len,
            prefactor: e.prefactor,
            scales: e.scales,
            raw_counts: e.raw_counts,
            counts: e.counts,
            slopes: e.slopes,
            grid: e.grid,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct InfeasibilityReport {
    n: usize,
    params: crate::codes::CodeParams,
    certification: crate::codes::Certification,
    measured: ErrorReport,
    claimed: crate::codes::ClaimedBounds,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Family;

    fn config(json: serde_json::Value) -> Result<ExperimentConfig, String> {
        parse_config(&json.to_string())
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(config(serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle"}, "sead": 1})).is_err());
        assert!(config(serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle", "depth": 3}})).is_err());
        let c = config(serde_json::json!({"experiment": "x", "channel": {"family": "bloch_circle"}})).unwrap();
        assert_eq!(c.channel, ChannelSpec::Family(Family::BlochCircle));
        assert_eq!(c.schedule, Schedule::default());
    }

    #[test]
    fn alpha_above_quarter_is_a_validation_error() {
        let c = config(serde_json::json!({
            "experiment": "x", "channel": {"family": "bloch_circle"},
            "pipeline": {"kind": "typical", "n": [4], "alpha": 0.3}
        }))
        .unwrap();
        let err = Experiment::from_config(c, PathBuf::new(), &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn empty_n_list_is_a_validation_error() {
        let c = config(serde_json::json!({
            "experiment": "x", "channel": {"family": "bloch_circle"},
            "pipeline": {"kind": "pure", "n": []}
        }))
        .unwrap();
        assert!(Experiment::from_config(c, PathBuf::new(), &Overrides::default()).is_err());
    }

    #[test]
    fn hash_ignores_output_dir_but_not_seed() {
        let c = config(serde_json::json!({"experiment": "x", "channel": {"family": "mixed_segment"}})).unwrap();
        let mut other = c.clone();
        other.out = Some("elsewhere".into());
        assert_eq!(config_hash(&c), config_hash(&other));
        other.seed = 9;
        assert_ne!(config_hash(&c), config_hash(&other));
        assert_eq!(config_hash(&c).len(), 64);
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, -7.0] {
            assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f(f64::INFINITY), "inf");
    }

    #[test]
    fn smallest_block_length_for_delta() {
        assert_eq!(smallest_n_for(0.5, 2), 1);
        assert_eq!(smallest_n_for(2.0, 2), 4);
        assert_eq!(smallest_n_for(1.5, 2), 3);
    }
}
