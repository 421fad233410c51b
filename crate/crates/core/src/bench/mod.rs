//! Simulation studies: simulate, aggregate at several bin widths, fit every
//! method, and collect one [`RunRecord`] per fit.
//!
//! Replicate `r` simulates from `RngStream::new(seed).substream(r)`, so its
//! latent realization depends only on the base seed and `r`. Every bin width
//! and method of that replicate sees the same events.

mod plot;
mod records;
mod summary;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binned::{binned_mle, MleOptions};
use crate::continuous::continuous_mle;
use crate::error::{HawkesError, Result};
use crate::inar::{inar_fit, InarConfig};
use crate::kernels::{HawkesParams, KernelFamily};
use crate::mcem::{mcem_fit, McemConfig};
use crate::process::{aggregate, BinSpec, BinnedCounts, EventSequence};
use crate::rng::{splitmix64, RngStream};
use crate::simulate::{simulate_with, DEFAULT_EVENT_CAP};

pub use plot::{emit_plots, render_bias_vs_delta, render_boxplot};
pub use records::{read_records_csv, records_from_csv, records_to_csv, write_records_csv, RecordSet};
pub use summary::{quantile, summarize, summary_to_csv, BoxStats, Summary, SummaryRow, QUANTILE_RULE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Inar,
    Binned,
    Mcem,
    ContinuousOracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Inar => "inar",
            Method::Binned => "binned",
            Method::Mcem => "mcem",
            Method::ContinuousOracle => "continuous-oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = HawkesError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inar" => Ok(Method::Inar),
            "binned" => Ok(Method::Binned),
            "mcem" => Ok(Method::Mcem),
            "continuous-oracle" => Ok(Method::ContinuousOracle),
            other => Err(HawkesError::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Singular,
    Nonconverged,
    Boundary,
    Failed,
}

impl Status {
    pub const ALL: [Status; 5] =
        [Status::Ok, Status::Singular, Status::Nonconverged, Status::Boundary, Status::Failed];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Singular => "singular",
            Status::Nonconverged => "nonconverged",
            Status::Boundary => "boundary",
            Status::Failed => "failed",
        }
    }

    /// No estimate was produced.
    pub fn is_failure(self) -> bool {
        matches!(self, Status::Singular | Status::Failed)
    }
}

impl std::str::FromStr for Status {
    type Err = HawkesError;
    fn from_str(s: &str) -> Result<Self> {
        Status::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| HawkesError::Config(format!("unknown status {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    /// Bin width; `None` for fits on the latent times.
    pub delta: Option<f64>,
    pub replicate: usize,
    pub status: Status,
    /// Parameter estimates in [`HawkesParams::values`] order; empty on failure.
    pub estimates: Vec<f64>,
    /// `estimate - truth`, componentwise.
    pub bias: Vec<f64>,
    pub wall_time_s: f64,
    /// [`HawkesError::kind`] of the error behind a failed fit.
    #[serde(default)]
    pub error: Option<String>,
    pub message: Option<String>,
}

fn default_horizon() -> f64 {
    1000.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_failure_threshold() -> f64 {
    0.5
}

fn default_event_cap() -> usize {
    DEFAULT_EVENT_CAP
}

fn default_methods() -> Vec<Method> {
    vec![Method::Inar, Method::Binned, Method::Mcem]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub truth: HawkesParams,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    pub deltas: Vec<f64>,
    pub replicates: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    /// Kernel family fitted by the likelihood methods; the truth's by default.
    #[serde(default)]
    pub family: Option<KernelFamily>,
    #[serde(default)]
    pub mcem: McemConfig,
    #[serde(default)]
    pub inar: InarConfig,
    #[serde(default)]
    pub mle: MleOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Fraction of failed fits above which the run counts as failed.
    #[serde(default = "default_failure_threshold")]
    pub failure_threshold: f64,
    #[serde(default = "default_event_cap")]
    pub event_cap: usize,
}

impl ExperimentConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(truth: HawkesParams, deltas: Vec<f64>, replicates: usize, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            truth,
            horizon: default_horizon(),
            deltas,
            replicates,
            methods,
            seed: 0,
            family: None,
            mcem: McemConfig::default(),
            inar: InarConfig::default(),
            mle: MleOptions::default(),
            output_dir: default_output_dir(),
            failure_threshold: default_failure_threshold(),
            event_cap: default_event_cap(),
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family.unwrap_or(self.truth.family())
    }

    pub fn param_names(&self) -> Vec<String> {
        HawkesParams::param_names(self.family()).into_iter().map(String::from).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HawkesError::Config(msg));
        self.truth.validate_stationary().map_err(|e| HawkesError::Config(format!("truth: {e}")))?;
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods given".into());
        }
        let binned_methods = self.methods.iter().any(|m| *m != Method::ContinuousOracle);
        if binned_methods && self.deltas.is_empty() {
            return bad("deltas must be nonempty".into());
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return bad(format!("bin widths must be positive, got {d}"));
        }
        let max_delta = self.deltas.iter().copied().fold(0.0, f64::max);
        if !(self.horizon > max_delta && self.horizon.is_finite()) {
            return bad(format!("horizon {} must exceed every bin width", self.horizon));
        }
        if !(0.0..=1.0).contains(&self.failure_threshold) {
            return bad(format!("failure_threshold must lie in [0, 1], got {}", self.failure_threshold));
        }
        if self.mcem.family != self.family() && self.methods.contains(&Method::Mcem) {
            return bad(format!("mcem.family is {} but the fitted family is {}", self.mcem.family, self.family()));
        }
        self.mcem.validate()
    }
}

fn inar_record(counts: &BinnedCounts, cfg: &InarConfig) -> (Status, Vec<f64>, Option<HawkesError>) {
    match inar_fit(counts, cfg) {
        Ok(est) => {
            let status = if est.fit.boundary { Status::Boundary } else { Status::Ok };
            (status, est.fit.params.values(), None)
        }
        Err(e @ (HawkesError::SingularDesign { .. } | HawkesError::TooFewBins { .. })) => {
            (Status::Singular, vec![], Some(e))
        }
        Err(e) => (Status::Failed, vec![], Some(e)),
    }
}

fn mle_record(fit: Result<crate::binned::BinnedMleResult>) -> (Status, Vec<f64>, Option<HawkesError>) {
    match fit {
        Ok(r) => {
            let status = if !r.converged {
                Status::Nonconverged
            } else if r.boundary {
                Status::Boundary
            } else {
                Status::Ok
            };
            (status, r.params.values(), None)
        }
        Err(e) => (Status::Failed, vec![], Some(e)),
    }
}

/// Seed for one (replicate, bin width) fit, independent of list positions.
fn fit_seed(base: u64, replicate: usize, delta: Option<f64>) -> u64 {
    let d = delta.map_or(u64::MAX, f64::to_bits);
    splitmix64(base ^ splitmix64(replicate as u64 ^ splitmix64(d)))
}

/// What one fit needs, shared by simulated and external data.
struct FitContext<'a> {
    family: KernelFamily,
    seed: u64,
    mcem: &'a McemConfig,
    inar: &'a InarConfig,
    mle: &'a MleOptions,
    truth: Option<Vec<f64>>,
}

impl ExperimentConfig {
    fn context(&self) -> FitContext<'_> {
        FitContext {
            family: self.family(),
            seed: self.seed,
            mcem: &self.mcem,
            inar: &self.inar,
            mle: &self.mle,
            truth: Some(self.truth.values()),
        }
    }
}

fn fit_one(
    cfg: &FitContext<'_>,
    method: Method,
    delta: Option<f64>,
    replicate: usize,
    events: &EventSequence,
    counts: Option<&BinnedCounts>,
) -> RunRecord {
    let start = Instant::now();
    let family = cfg.family;
    let seed = fit_seed(cfg.seed, replicate, delta);
    let mle_opts = MleOptions { seed, ..*cfg.mle };
    let (status, estimates, fault) = match (method, counts) {
        (Method::ContinuousOracle, _) => mle_record(continuous_mle(events, family, &mle_opts)),
        (Method::Binned, Some(c)) => mle_record(binned_mle(c, family, &mle_opts)),
        (Method::Inar, Some(c)) => inar_record(c, cfg.inar),
        (Method::Mcem, Some(c)) => match mcem_fit(c, &McemConfig { seed, ..cfg.mcem.clone() }) {
            Ok(r) => {
                let status = if r.trace.converged { Status::Ok } else { Status::Nonconverged };
                (status, r.params.values(), None)
            }
            Err(e) => (Status::Failed, vec![], Some(e)),
        },
        (_, None) => (Status::Failed, vec![], Some(HawkesError::InvalidBins("no counts for this bin width".into()))),
    };
    let (status, estimates, fault) = if estimates.iter().all(|v| v.is_finite()) {
        (status, estimates, fault)
    } else {
        (Status::Failed, vec![], Some(HawkesError::FitFailure(format!("non-finite estimate {estimates:?}"))))
    };
    let bias = match &cfg.truth {
        Some(truth) if estimates.len() == truth.len() => estimates.iter().zip(truth).map(|(e, t)| e - t).collect(),
        _ => vec![],
    };
    RunRecord {
        method,
        delta,
        replicate,
        status,
        estimates,
        bias,
        wall_time_s: start.elapsed().as_secs_f64(),
        error: fault.as_ref().map(|e| e.kind().to_string()),
        message: fault.map(|e| e.to_string()),
    }
}

fn replicate_records(cfg: &ExperimentConfig, r: usize) -> Vec<RunRecord> {
    let mut rng = RngStream::new(cfg.seed).substream(r as u64);
    let events = match simulate_with(&cfg.truth, cfg.horizon, cfg.event_cap, &mut rng) {
        Ok(ev) => ev,
        Err(e) => return failed_replicate(cfg, r, &e),
    };
    let mut tasks: Vec<(Method, Option<f64>, Option<BinnedCounts>)> = Vec::new();
    if cfg.methods.contains(&Method::ContinuousOracle) {
        tasks.push((Method::ContinuousOracle, None, None));
    }
    for &delta in &cfg.deltas {
        let counts = BinSpec::covering(cfg.horizon, delta).and_then(|spec| aggregate(&events, &spec)).ok();
        for &m in cfg.methods.iter().filter(|m| **m != Method::ContinuousOracle) {
            tasks.push((m, Some(delta), counts.clone()));
        }
    }
    let ctx = cfg.context();
    tasks
        .par_iter()
        .map(|(m, delta, counts)| fit_one(&ctx, *m, *delta, r, &events, counts.as_ref()))
        .collect()
}

fn failed_replicate(cfg: &ExperimentConfig, r: usize, err: &HawkesError) -> Vec<RunRecord> {
    let mut out = Vec::new();
    let fail = |method, delta| RunRecord {
        method,
        delta,
        replicate: r,
        status: Status::Failed,
        estimates: vec![],
        bias: vec![],
        wall_time_s: 0.0,
        error: Some(err.kind().to_string()),
        message: Some(format!("simulation failed: {err}")),
    };
    if cfg.methods.contains(&Method::ContinuousOracle) {
        out.push(fail(Method::ContinuousOracle, None));
    }
    for &d in &cfg.deltas {
        for &m in cfg.methods.iter().filter(|m| **m != Method::ContinuousOracle) {
            out.push(fail(m, Some(d)));
        }
    }
    out
}

/// Runs every replicate, bin width and method. Fit failures become records.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let per_rep: Vec<Vec<RunRecord>> = (0..cfg.replicates).into_par_iter().map(|r| replicate_records(cfg, r)).collect();
    Ok(per_rep.into_iter().flatten().collect())
}

fn default_fit_methods() -> Vec<Method> {
    vec![Method::Mcem]
}

/// Settings for fitting counts that come without a ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub methods: Vec<Method>,
    pub family: KernelFamily,
    pub seed: u64,
    pub mcem: McemConfig,
    pub inar: InarConfig,
    pub mle: MleOptions,
    pub failure_threshold: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            methods: default_fit_methods(),
            family: KernelFamily::Exponential,
            seed: 0,
            mcem: McemConfig::default(),
            inar: InarConfig::default(),
            mle: MleOptions::default(),
            failure_threshold: default_failure_threshold(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.methods.contains(&Method::ContinuousOracle) {
            return Err(HawkesError::Config("methods must be a nonempty subset of inar, binned, mcem".into()));
        }
        if !(0.0..=1.0).contains(&self.failure_threshold) {
            return Err(HawkesError::Config(format!(
                "failure_threshold must lie in [0, 1], got {}",
                self.failure_threshold
            )));
        }
        if self.mcem.family != self.family && self.methods.contains(&Method::Mcem) {
            return Err(HawkesError::Config(format!(
                "mcem.family is {} but the fitted family is {}",
                self.mcem.family, self.family
            )));
        }
        self.mcem.validate()
    }

    pub fn param_names(&self) -> Vec<String> {
        HawkesParams::param_names(self.family).into_iter().map(String::from).collect()
    }
}

/// Fits each configured method to externally supplied counts. The records
/// carry no bias.
pub fn fit_counts(cfg: &FitConfig, counts: &BinnedCounts) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let ctx = FitContext {
        family: cfg.family,
        seed: cfg.seed,
        mcem: &cfg.mcem,
        inar: &cfg.inar,
        mle: &cfg.mle,
        truth: None,
    };
    let events = EventSequence::empty(counts.spec().end())?;
    let delta = counts.spec().uniform_width();
    Ok(cfg.methods.iter().map(|&m| fit_one(&ctx, m, delta, 0, &events, Some(counts))).collect())
}

/// Share of records without an estimate.
pub fn failure_fraction(records: &[RunRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.status.is_failure()).count() as f64 / records.len() as f64
}

/// Writes records, summary and plots into `cfg.output_dir`. Plots are skipped
/// when no fit produced an estimate.
pub fn write_outputs(cfg: &ExperimentConfig, records: &[RunRecord]) -> Result<Summary> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let names = cfg.param_names();
    write_records_csv(records, &names, &cfg.output_dir.join("records.csv"))?;
    let set = RecordSet { parameters: names.clone(), records: records.to_vec() };
    crate::io::write_json(&set, &cfg.output_dir.join("records.json"))?;
    let summary = summarize(records, &names)?;
    std::fs::write(cfg.output_dir.join("summary.csv"), summary_to_csv(&summary)?)?;
    crate::io::write_json(&summary, &cfg.output_dir.join("summary.json"))?;
    match emit_plots(&summary, &cfg.output_dir) {
        Ok(_) | Err(HawkesError::EmptySummary) => Ok(summary),
        Err(e) => Err(e),
    }
}
