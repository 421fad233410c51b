//! Monte Carlo EM for Hawkes parameters from bin counts.
//!
//! Each E-step draws `m` *legal* latent event sets (sets whose per-bin
//! counts equal the observed counts) from a proposal `q`, weights them by
//! `p / q` with `p` the continuous-time likelihood, and forms the
//! self-normalized weighted complete-data log-likelihood
//!
//! ```text
//! Q(Θ) = Σ_k w_k log L(Θ; T_k) / Σ_k w_k.
//! ```
//!
//! The M-step maximizes `Q` under the stationarity constraint, warm-started
//! from the current iterate. Iteration stops once successive iterates move
//! less than `epsilon` in Euclidean norm.
//!
//! # Proposal
//!
//! Bins are visited in time order. Inside a bin `[b-, b+)` holding `m`
//! events, event `i` is drawn by inverting the conditional CDF of the next
//! arrival truncated to `[L_i, b+)`, where `L_1 = b-` and `L_i` is the
//! previous draw. The density of one draw is
//!
//! ```text
//! λ*(t) exp(-∫_{L_i}^t λ*) / (1 - exp(-∫_{L_i}^{b+} λ*))
//! ```
//!
//! and the proposal density of the whole set is the product over draws, so
//! `log q` is exact. [`ProposalMode::JointMode`] instead returns the
//! maximizer of the truncated joint density per bin; it is deterministic and
//! only meant for diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::intensity::{ExcitationState, IntensityTracker};
use crate::kernels::{HawkesParams, Kernel, KernelFamily};
use crate::likelihood::loglik;
use crate::optimize::{self, NelderMeadOptions, OptProblem};
use crate::process::{self, BinnedCounts, EventSequence};
use crate::rng::{open01, Rng, RngStream};

/// Normalized weights below this are dropped from the M-step objective.
/// Their total contribution to `Q` is below double rounding.
const PRUNE_WEIGHT: f64 = 1e-16;
const ROOT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalMode {
    #[default]
    SequentialSample,
    JointMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McemConfig {
    /// Monte Carlo samples per E-step.
    pub m: usize,
    /// Stop when `‖Θ^{i+1} − Θ^i‖₂ <= epsilon`.
    pub epsilon: f64,
    pub max_em_iters: usize,
    pub seed: u64,
    pub proposal_mode: ProposalMode,
    pub family: KernelFamily,
    /// Starting point; drawn as sorted `Unif(1, 3)` values when unset.
    pub init: Option<HawkesParams>,
    pub mstep_tolerance: f64,
    pub mstep_max_iters: usize,
    /// Consecutive degenerate E-steps tolerated before giving up.
    pub degenerate_patience: usize,
    /// Resample the particle set at a bin boundary once its ESS falls below
    /// `resample_threshold · m`. Zero gives plain importance sampling.
    pub resample_threshold: f64,
    pub smoothing: Smoothing,
}

impl Default for McemConfig {
    fn default() -> Self {
        McemConfig {
            m: 50,
            epsilon: 1e-3,
            max_em_iters: 100,
            seed: 0,
            proposal_mode: ProposalMode::SequentialSample,
            family: KernelFamily::Exponential,
            init: None,
            mstep_tolerance: optimize::DEFAULT_TOLERANCE,
            mstep_max_iters: optimize::DEFAULT_MAX_ITERS,
            degenerate_patience: 5,
            resample_threshold: 0.5,
            smoothing: Smoothing::Backward,
        }
    }
}

impl McemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(HawkesError::Config("m must be at least 1".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(HawkesError::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        if !(0.0..=1.0).contains(&self.resample_threshold) {
            return Err(HawkesError::Config(format!(
                "resample_threshold must lie in [0, 1], got {}",
                self.resample_threshold
            )));
        }
        if let Some(init) = &self.init {
            init.validate_stationary()?;
            if init.family() != self.family {
                return Err(HawkesError::Config("init kernel does not match family".into()));
            }
        }
        Ok(())
    }
}

/// One legal latent event set with its log importance weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedSample {
    pub times: EventSequence,
    pub log_w: f64,
}

/// Draws from one bin.
#[derive(Clone, Debug, PartialEq)]
pub struct BinDraw {
    pub times: Vec<f64>,
    /// Log proposal density of the draw; `None` in joint-mode.
    pub log_q: Option<f64>,
}

/// Solves `∫_{lo}^{t} λ* = target` for `t ∈ [lo, hi]` by safeguarded Newton.
fn invert_compensator(tracker: &IntensityTracker, lo: f64, hi: f64, target: f64) -> Result<f64> {
    let g = |t: f64| tracker.compensator(lo, t) - target;
    let g_hi = g(hi);
    if g_hi < -1e-12 * target.max(1.0) || !g_hi.is_finite() {
        return Err(HawkesError::RootFindFailure { lower: lo, upper: hi });
    }
    let (mut a, mut b) = (lo, hi);
    let guess = lo + target / tracker.intensity(lo);
    let mut t = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
    for _ in 0..200 {
        let f = g(t);
        if f > 0.0 {
            b = t;
        } else {
            a = t;
        }
        let slope = tracker.intensity(t);
        let newton = t - f / slope;
        if slope > 0.0 && newton > a && newton < b {
            let step = (newton - t).abs();
            t = newton;
            if step <= 1e-13 * (1.0 + t.abs()) {
                return Ok(t);
            }
        } else {
            t = 0.5 * (a + b);
        }
        if b - a <= ROOT_TOL {
            return Ok(t);
        }
    }
    Ok(t)
}

/// Sequentially samples `m_events` ordered times in `[b_minus, b_plus)`,
/// recording them into `tracker`.
/// Returns the draws, their log proposal density and `Σ log(mass_i)`, the
/// log truncation masses.
fn sample_bin_tracked(
    tracker: &mut IntensityTracker,
    b_minus: f64,
    b_plus: f64,
    m_events: u64,
    rng: &mut Rng,
) -> Result<(Vec<f64>, f64, f64)> {
    let mut times = Vec::with_capacity(m_events as usize);
    let mut log_q = 0.0;
    let mut log_mass = 0.0;
    let mut left = b_minus;
    for k in 0..m_events {
        let lambda_max = tracker.compensator(left, b_plus);
        let mass = -(-lambda_max).exp_m1();
        let u = open01(rng);
        let target = -(-u * mass).ln_1p();
        let mut t = invert_compensator(tracker, left, b_plus, target)?;
        if tracker.last_event().is_some_and(|last| t <= last) {
            t = tracker.last_event().unwrap().next_up();
        }
        if t < b_minus {
            t = b_minus;
        }
        // Leave one representable time for each event still to come.
        let mut ceiling = b_plus.next_down();
        for _ in k + 1..m_events {
            ceiling = ceiling.next_down();
        }
        if t > ceiling {
            t = ceiling;
        }
        log_q += tracker.intensity(t).ln() - tracker.compensator(left, t) - mass.ln();
        log_mass += mass.ln();
        tracker.record(t);
        times.push(t);
        left = t;
    }
    Ok((times, log_q, log_mass))
}

/// Log density of `times` under the sequential proposal for one bin.
pub fn proposal_log_density(
    params: &HawkesParams,
    history: &[f64],
    b_minus: f64,
    b_plus: f64,
    times: &[f64],
) -> f64 {
    let mut tracker = IntensityTracker::with_history(params, history);
    let mut left = b_minus;
    let mut total = 0.0;
    for &t in times {
        if t < left || t >= b_plus {
            return f64::NEG_INFINITY;
        }
        let mass = -(-tracker.compensator(left, b_plus)).exp_m1();
        total += tracker.intensity(t).ln() - tracker.compensator(left, t) - mass.ln();
        tracker.record(t);
        left = t;
    }
    total
}

/// Log of the truncated joint density (`f*` over the normalizer `κ`) of
/// ordered `times` in `[b_minus, b_plus)` given the history.
fn truncated_joint_log_density(
    params: &HawkesParams,
    history: &[f64],
    b_minus: f64,
    b_plus: f64,
    times: &[f64],
) -> f64 {
    let anchor = history.last().copied().unwrap_or(0.0);
    let mut all = history.to_vec();
    let mut log_f = 0.0;
    let mut prev = anchor;
    for &t in times {
        log_f += process::cif_eval(params, &all, t).ln() - process::compensator(params, &all, prev, t);
        all.push(t);
        prev = t;
    }
    // Joint CDF Π_i (1 − exp(−∫_{x_{i−1}}^{x_i} λ*)) with x_0 = anchor.
    let joint_cdf = |xs: &[f64]| -> f64 {
        let mut hist = history.to_vec();
        let mut prev = anchor;
        let mut prod = 1.0;
        for &x in xs {
            prod *= -(-process::compensator(params, &hist, prev, x)).exp_m1();
            hist.push(x);
            prev = x;
        }
        prod
    };
    let m = times.len();
    let mut upper = times.to_vec();
    upper[m - 1] = b_plus;
    let mut lower = times.to_vec();
    lower[0] = b_minus;
    let kappa = joint_cdf(&upper) - joint_cdf(&lower);
    if kappa > 0.0 {
        log_f - kappa.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn joint_mode_bin(
    params: &HawkesParams,
    history: &[f64],
    b_minus: f64,
    b_plus: f64,
    m_events: u64,
) -> Vec<f64> {
    let m = m_events as usize;
    let width = b_plus - b_minus;
    // m free logits; a fixed zero logit closes the simplex of gaps.
    let decode = |y: &[f64]| -> Vec<f64> {
        let mx = y.iter().copied().fold(0.0, f64::max);
        let w: Vec<f64> = std::iter::once(0.0).chain(y.iter().copied()).map(|v| (v - mx).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        w[..m]
            .iter()
            .map(|wi| {
                acc += wi / total;
                b_minus + width * acc
            })
            .collect()
    };
    let objective = |y: &[f64]| {
        let ts = decode(y);
        if ts.windows(2).any(|w| !(w[0] < w[1])) || ts[0] < b_minus || ts[m - 1] >= b_plus {
            return f64::INFINITY;
        }
        -truncated_joint_log_density(params, history, b_minus, b_plus, &ts)
    };
    let opts = NelderMeadOptions { tolerance: 1e-10, max_iters: 2000, initial_step: 0.5 };
    let res = optimize::minimize(objective, &vec![0.0; m], &opts);
    decode(&res.x)
}

/// Draws `m_events` legal times for bin `[b_minus, b_plus)` given `history`.
pub fn sample_bin(
    params: &HawkesParams,
    history: &[f64],
    b_minus: f64,
    b_plus: f64,
    m_events: u64,
    mode: ProposalMode,
    rng: &mut Rng,
) -> Result<BinDraw> {
    if !(b_minus < b_plus) || m_events == 0 || history.last().is_some_and(|&h| h > b_minus) {
        return Err(HawkesError::InvalidBins(format!(
            "cannot sample {m_events} events in [{b_minus}, {b_plus}) after the given history"
        )));
    }
    match mode {
        ProposalMode::SequentialSample => {
            let mut tracker = IntensityTracker::with_history(params, history);
            let (times, log_q, _) = sample_bin_tracked(&mut tracker, b_minus, b_plus, m_events, rng)?;
            Ok(BinDraw { times, log_q: Some(log_q) })
        }
        ProposalMode::JointMode => Ok(BinDraw {
            times: joint_mode_bin(params, history, b_minus, b_plus, m_events),
            log_q: None,
        }),
    }
}

/// One legal latent set by sequential sampling over the non-empty bins,
/// weighted by `log p − log q`.
pub fn propose_legal(params: &HawkesParams, counts: &BinnedCounts, rng: &mut Rng) -> Result<WeightedSample> {
    let spec = counts.spec();
    let mut tracker = IntensityTracker::new(params);
    let mut times = Vec::with_capacity(counts.total() as usize);
    let mut log_q = 0.0;
    for (j, &n) in counts.counts().iter().enumerate() {
        if n == 0 {
            continue;
        }
        let (draws, lq, _) = sample_bin_tracked(&mut tracker, spec.lower(j), spec.upper(j), n, rng)?;
        times.extend(draws);
        log_q += lq;
    }
    let events = EventSequence::new(times, spec.end())?;
    debug_assert_eq!(process::aggregate(&events, spec).unwrap().counts(), counts.counts());
    let log_p = loglik(params, &events).checked()?;
    Ok(WeightedSample { times: events, log_w: log_p - log_q })
}

/// The joint-mode latent path: per-bin maximizers of the truncated joint density.
pub fn propose_mode_path(params: &HawkesParams, counts: &BinnedCounts) -> Result<EventSequence> {
    let spec = counts.spec();
    let mut times: Vec<f64> = Vec::with_capacity(counts.total() as usize);
    for (j, &n) in counts.counts().iter().enumerate() {
        if n > 0 {
            let draw = joint_mode_bin(params, &times, spec.lower(j), spec.upper(j), n);
            times.extend(draw);
        }
    }
    EventSequence::new(times, spec.end())
}

#[derive(Clone)]
struct Particle {
    tracker: IntensityTracker,
    times: Vec<f64>,
    log_w: f64,
    /// Time up to which the weight accounts for the compensator.
    covered: f64,
}

/// Systematic resampling: `m` ancestor indices from a single uniform.
fn systematic_resample(weights: &[f64], rng: &mut Rng) -> Vec<usize> {
    let m = weights.len();
    let u0 = open01(rng) / m as f64;
    let mut out = Vec::with_capacity(m);
    let mut cum = weights[0];
    let mut i = 0;
    for k in 0..m {
        let u = u0 + k as f64 / m as f64;
        while u > cum && i + 1 < m {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
    }
    out
}

/// Index drawn with probability proportional to `exp(log_w)`.
fn draw_index(log_w: &[f64], rng: &mut Rng) -> Result<usize> {
    let w = ImportanceWeights::from_log(log_w)?;
    let u = open01(rng);
    let mut cum = 0.0;
    for (i, wi) in w.normalized.iter().enumerate() {
        cum += wi;
        if u <= cum {
            return Ok(i);
        }
    }
    Ok(w.normalized.iter().rposition(|&x| x > 0.0).unwrap_or(0))
}

/// How the E-step turns the particle set into latent samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    /// Final particles with their ancestral paths and weights.
    Genealogy,
    /// Backward simulation through the stored filter; `m` equally weighted
    /// paths. Exponential kernel only, other kernels use the genealogy.
    #[default]
    Backward,
}

/// Filter output at one non-empty bin, before any resampling.
struct FilterStep {
    segments: Vec<Vec<f64>>,
    states: Vec<ExcitationState>,
    log_w: Vec<f64>,
}

/// Outcome of one E-step.
#[derive(Clone, Debug)]
pub struct EStep {
    pub samples: Vec<WeightedSample>,
    /// Number of bin boundaries at which the particle set was resampled.
    pub resamples: usize,
    /// ESS of the final filter weights.
    pub filter_ess: f64,
}

/// Settings of [`sequential_e_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EStepOptions {
    pub m: usize,
    pub resample_threshold: f64,
    pub smoothing: Smoothing,
}

/// Draws `m` legal latent sets, advancing a particle set bin by bin.
///
/// Particle `k` draws from `draws.substream(offset + k)`. Each particle's
/// log weight grows by `Σ log(mass_i)` for the bin it just filled and by
/// `-∫ λ*` over the stretches the proposal did not cover, so that without
/// resampling it equals `log p − log q` exactly. When the ESS drops below
/// `resample_threshold · m` after a bin, ancestors are drawn systematically
/// and the weights reset to zero.
pub fn sequential_e_step(
    params: &HawkesParams,
    counts: &BinnedCounts,
    opts: &EStepOptions,
    draws: &RngStream,
    offset: u64,
) -> Result<EStep> {
    let m = opts.m;
    let spec = counts.spec();
    let end = spec.end();
    let backward = opts.smoothing == Smoothing::Backward
        && m > 1
        && matches!(params.kernel, Kernel::Exponential { .. });
    let mut rngs: Vec<Rng> = (0..m as u64).map(|k| draws.substream(offset + k)).collect();
    let mut resample_rng = draws.child(u64::MAX).substream(offset);
    let mut particles = vec![
        Particle {
            tracker: IntensityTracker::new(params),
            times: Vec::new(),
            log_w: 0.0,
            covered: 0.0,
        };
        m
    ];
    let mut steps: Vec<FilterStep> = Vec::new();
    let mut resamples = 0;
    let nonempty: Vec<usize> = (0..counts.len()).filter(|&j| counts.counts()[j] > 0).collect();
    for (pos, &j) in nonempty.iter().enumerate() {
        let (lo, hi, n) = (spec.lower(j), spec.upper(j), counts.counts()[j]);
        let mut segments = Vec::with_capacity(if backward { m } else { 0 });
        for (p, rng) in particles.iter_mut().zip(rngs.iter_mut()) {
            let gap = p.tracker.compensator(p.covered, lo);
            let (draw, _, log_mass) = sample_bin_tracked(&mut p.tracker, lo, hi, n, rng)?;
            p.covered = *draw.last().unwrap();
            p.log_w += log_mass - gap;
            if backward {
                segments.push(draw);
            } else {
                p.times.extend(draw);
            }
        }
        if backward {
            steps.push(FilterStep {
                segments,
                states: particles.iter().map(|p| p.tracker.exponential_state().unwrap()).collect(),
                log_w: particles.iter().map(|p| p.log_w).collect(),
            });
        }
        if opts.resample_threshold > 0.0 && m > 1 && pos + 1 < nonempty.len() {
            let log_w: Vec<f64> = particles.iter().map(|p| p.log_w).collect();
            let w = ImportanceWeights::from_log(&log_w)?;
            if w.ess < opts.resample_threshold * m as f64 {
                let ancestors = systematic_resample(&w.normalized, &mut resample_rng);
                particles = ancestors
                    .iter()
                    .map(|&a| {
                        let mut p = particles[a].clone();
                        p.log_w = 0.0;
                        p
                    })
                    .collect();
                resamples += 1;
            }
        }
    }
    let final_log_w: Vec<f64> =
        particles.iter().map(|p| p.log_w - p.tracker.compensator(p.covered, end)).collect();
    let filter_ess = ImportanceWeights::from_log(&final_log_w)?.ess;

    let samples = if backward && !steps.is_empty() {
        let last = steps.len() - 1;
        steps[last].log_w.clone_from(&final_log_w);
        let mut back_rng = draws.child(u64::MAX - 1).substream(offset);
        (0..m)
            .map(|_| {
                let times = backward_path(params, &steps, end, &mut back_rng)?;
                Ok(WeightedSample { times: EventSequence::new(times, end)?, log_w: 0.0 })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        particles
            .into_iter()
            .zip(final_log_w)
            .map(|(p, log_w)| Ok(WeightedSample { times: EventSequence::new(p.times, end)?, log_w }))
            .collect::<Result<Vec<_>>>()?
    };
    for s in &samples {
        debug_assert_eq!(process::aggregate(&s.times, spec).unwrap().counts(), counts.counts());
    }
    Ok(EStep { samples, resamples, filter_ess })
}

/// One backward-simulated path through the stored filter steps.
///
/// Going from the last step to the first, step `j`'s segment is taken from
/// particle `i` with probability proportional to `w_j(i)` times the density
/// of the already chosen later segments given particle `i`'s state. Only the
/// state-dependent part of that density is computed: the later log
/// intensities are summed until the particle's excitation has decayed below
/// double precision, the compensator in closed form.
fn backward_path(params: &HawkesParams, steps: &[FilterStep], end: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    let (nu, alpha, beta) = match params.kernel {
        Kernel::Exponential { alpha, beta } => (params.nu, alpha, beta),
        _ => unreachable!("backward simulation needs the exponential kernel"),
    };
    let last = steps.len() - 1;
    let mut chosen: Vec<&[f64]> = Vec::with_capacity(steps.len());
    chosen.push(&steps[last].segments[draw_index(&steps[last].log_w, rng)?]);
    // Earliest later events and their own excitation Σ exp(-β(t - t_i)).
    let mut window: Vec<(f64, f64)> = Vec::new();
    let mut log_w = Vec::with_capacity(steps[0].log_w.len());
    for j in (0..last).rev() {
        let step = &steps[j];
        let horizon = step
            .states
            .iter()
            .map(|s| {
                let s_last = s.last_time.unwrap();
                s_last + ((alpha * (1.0 + s.a) / nu).max(1.0) * 1e16).ln() / beta
            })
            .fold(f64::NEG_INFINITY, f64::max);
        window.clear();
        let mut own = 0.0;
        let mut prev: Option<f64> = None;
        'outer: for seg in chosen.iter().rev() {
            for &t in seg.iter() {
                if t > horizon {
                    break 'outer;
                }
                if let Some(p) = prev {
                    own = (own + 1.0) * (-beta * (t - p)).exp();
                }
                window.push((t, own));
                prev = Some(t);
            }
        }
        log_w.clear();
        for (i, s) in step.states.iter().enumerate() {
            let s_last = s.last_time.unwrap();
            let excite = 1.0 + s.a;
            let mut lf = -nu * (end - s_last) + (alpha / beta) * excite * (-beta * (end - s_last)).exp_m1();
            let floor = 1e-16 * nu;
            for &(t, own) in &window {
                let past = alpha * excite * (-beta * (t - s_last)).exp();
                if past < floor {
                    break;
                }
                lf += (past / (nu + alpha * own)).ln_1p();
            }
            log_w.push(step.log_w[i] + lf);
        }
        chosen.push(&step.segments[draw_index(&log_w, rng)?]);
    }
    Ok(chosen.iter().rev().flat_map(|seg| seg.iter().copied()).collect())
}

/// Self-normalized importance weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceWeights {
    pub normalized: Vec<f64>,
    /// `(Σw)² / Σw²`.
    pub ess: f64,
}

impl ImportanceWeights {
    /// Normalizes in log space by shifting with the maximum.
    pub fn from_log(log_w: &[f64]) -> Result<Self> {
        let max = log_w.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(HawkesError::Config("no sample has a finite log weight".into()));
        }
        let raw: Vec<f64> = log_w.iter().map(|&l| if l.is_finite() { (l - max).exp() } else { 0.0 }).collect();
        let total: f64 = raw.iter().sum();
        let normalized: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let ess = 1.0 / normalized.iter().map(|w| w * w).sum::<f64>();
        Ok(ImportanceWeights { normalized, ess })
    }

    /// All mass on effectively one sample (only meaningful when `m > 1`).
    pub fn is_degenerate(&self) -> bool {
        self.normalized.len() > 1 && self.ess < 1.0 + 1e-9
    }
}

/// `Q(Θ) = Σ_k w̄_k log L(Θ; T_k)` with self-normalized weights.
pub fn weighted_q(params: &HawkesParams, samples: &[WeightedSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(HawkesError::Config("weighted Q needs at least one sample".into()));
    }
    let log_w: Vec<f64> = samples.iter().map(|s| s.log_w).collect();
    let w = ImportanceWeights::from_log(&log_w)?;
    Ok(samples
        .iter()
        .zip(&w.normalized)
        .filter(|(_, &wk)| wk > 0.0)
        .map(|(s, wk)| wk * loglik(params, &s.times).or_neg_inf())
        .sum())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct McemTrace {
    /// `Θ^1` (the starting point), `Θ^2`, ...: one entry per M-step after the first.
    pub iterates: Vec<HawkesParams>,
    /// Maximized `Q` at each M-step.
    pub q_values: Vec<f64>,
    /// Effective sample size of the weights entering `Q`, per E-step.
    pub ess: Vec<f64>,
    /// ESS of the final particle filter weights, per E-step.
    pub filter_ess: Vec<f64>,
    pub degenerate: Vec<bool>,
    /// Resampling events per E-step.
    pub resamples: Vec<usize>,
    pub converged: bool,
}

impl McemTrace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McemResult {
    pub params: HawkesParams,
    pub trace: McemTrace,
}

/// Sorted `Unif(1, 3)` draws assigned in parameter order.
fn initial_params(family: KernelFamily, rng: &mut Rng) -> HawkesParams {
    use rand::Rng as _;
    let k = 1 + family.arity();
    let mut u: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..3.0)).collect();
    u.sort_by(f64::total_cmp);
    match family {
        KernelFamily::Exponential => HawkesParams { nu: u[0], kernel: Kernel::Exponential { alpha: u[1], beta: u[2] } },
        KernelFamily::PowerLaw => {
            HawkesParams { nu: u[0], kernel: Kernel::PowerLaw { alpha: u[1], beta: u[2], c: u[3] } }
        }
        // Lags drawn like the rest; n starts mid-range.
        KernelFamily::Rectangular => HawkesParams {
            nu: u[0],
            kernel: Kernel::Rectangular { n: 0.5, a: u[1] - 1.0, b: u[2] },
        },
    }
}

fn distance(a: &HawkesParams, b: &HawkesParams) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Runs MC-EM on `counts`.
pub fn mcem_fit(counts: &BinnedCounts, cfg: &McemConfig) -> Result<McemResult> {
    cfg.validate()?;
    if counts.is_all_zero() {
        return Err(HawkesError::AllZeroCounts);
    }
    let root = RngStream::new(cfg.seed);
    let mut theta = match cfg.init {
        Some(p) => p,
        None => initial_params(cfg.family, &mut root.child(0).substream(0)),
    };
    let draws = root.child(1);
    let mut trace = McemTrace { iterates: vec![theta], ..Default::default() };
    let mut degenerate_run = 0;

    for iter in 0..cfg.max_em_iters {
        let (samples, resamples, filter_ess) = match cfg.proposal_mode {
            ProposalMode::SequentialSample => {
                let opts = EStepOptions {
                    m: cfg.m,
                    resample_threshold: cfg.resample_threshold,
                    smoothing: cfg.smoothing,
                };
                let e = sequential_e_step(&theta, counts, &opts, &draws, (iter * cfg.m) as u64)?;
                (e.samples, e.resamples, e.filter_ess)
            }
            ProposalMode::JointMode => {
                (vec![WeightedSample { times: propose_mode_path(&theta, counts)?, log_w: 0.0 }], 0, 1.0)
            }
        };
        trace.resamples.push(resamples);
        trace.filter_ess.push(filter_ess);
        let log_w: Vec<f64> = samples.iter().map(|s| s.log_w).collect();
        let weights = ImportanceWeights::from_log(&log_w)?;
        let degenerate = weights.is_degenerate();
        trace.ess.push(weights.ess);
        trace.degenerate.push(degenerate);
        degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
        if degenerate_run >= cfg.degenerate_patience {
            return Err(HawkesError::DegenerateWeights { iterations: degenerate_run, ess: weights.ess });
        }

        let kept: Vec<(f64, &EventSequence)> = samples
            .iter()
            .zip(&weights.normalized)
            .filter(|(_, &w)| w >= PRUNE_WEIGHT)
            .map(|(s, &w)| (w, &s.times))
            .collect();
        let objective = |p: &HawkesParams| -> f64 {
            kept.iter().map(|(w, ev)| w * loglik(p, ev).or_neg_inf()).sum()
        };
        let problem = OptProblem {
            objective,
            family: cfg.family,
            start: theta,
            tolerance: cfg.mstep_tolerance,
            max_iters: cfg.mstep_max_iters,
        };
        let step = optimize::maximize(&problem)?;
        let next = step.params;
        trace.q_values.push(step.objective_value);
        trace.iterates.push(next);
        let moved = distance(&next, &theta);
        theta = next;
        if moved <= cfg.epsilon {
            trace.converged = true;
            break;
        }
    }
    Ok(McemResult { params: theta, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::BinSpec;

    fn poisson(nu: f64) -> HawkesParams {
        HawkesParams::exponential(nu, 1e-300, 1.0).unwrap()
    }

    #[test]
    fn truncated_exponential_inversion() {
        // One Poisson(1) event in [0, 1) at u = 0.5.
        let tr = IntensityTracker::new(&poisson(1.0));
        let mass = 1.0 - (-1.0f64).exp();
        let target = -(1.0 - 0.5 * mass).ln();
        let t = invert_compensator(&tr, 0.0, 1.0, target).unwrap();
        assert!((t - 0.379_885).abs() < 1e-6, "{t}");
        assert!((t + (1.0 - 0.5 * mass).ln()).abs() < 1e-10);
    }

    #[test]
    fn draws_are_ordered_and_inside() {
        let p = HawkesParams::exponential(0.5, 0.9, 2.0).unwrap();
        let mut rng = RngStream::new(3).substream(0);
        for m in 1..8 {
            let d = sample_bin(&p, &[0.2, 0.9], 1.0, 2.0, m, ProposalMode::SequentialSample, &mut rng).unwrap();
            assert_eq!(d.times.len(), m as usize);
            assert!(d.times.windows(2).all(|w| w[0] < w[1]));
            assert!(d.times.iter().all(|&t| (1.0..2.0).contains(&t)));
            let check = proposal_log_density(&p, &[0.2, 0.9], 1.0, 2.0, &d.times);
            assert!((check - d.log_q.unwrap()).abs() < 1e-9);
        }
        let j = sample_bin(&p, &[0.2], 1.0, 2.0, 3, ProposalMode::JointMode, &mut rng).unwrap();
        assert!(j.log_q.is_none());
        assert!(j.times.windows(2).all(|w| w[0] < w[1]) && j.times.iter().all(|&t| (1.0..2.0).contains(&t)));
    }

    #[test]
    fn rejects_bad_bins() {
        let p = poisson(1.0);
        let mut rng = RngStream::new(3).substream(0);
        assert!(sample_bin(&p, &[], 1.0, 1.0, 1, ProposalMode::SequentialSample, &mut rng).is_err());
        assert!(sample_bin(&p, &[1.5], 1.0, 2.0, 1, ProposalMode::SequentialSample, &mut rng).is_err());
        assert!(sample_bin(&p, &[], 0.0, 1.0, 0, ProposalMode::SequentialSample, &mut rng).is_err());
    }

    #[test]
    fn poisson_single_bin_weight() {
        // p = e^{-t}·e^{-(1-t)} = e^{-1}; q = e^{-t}/(1 - e^{-1}).
        let c = BinnedCounts::new(BinSpec::uniform(0.0, 1.0, 1).unwrap(), vec![1]).unwrap();
        let mut rng = RngStream::new(8).substream(0);
        let s = propose_legal(&poisson(1.0), &c, &mut rng).unwrap();
        let t = s.times.times()[0];
        let expected = -1.0 - (-t - (1.0 - (-1.0f64).exp()).ln());
        assert!((s.log_w - expected).abs() < 1e-12);
    }

    #[test]
    fn all_zero_counts_weight() {
        let p = HawkesParams::exponential(0.7, 0.4, 1.0).unwrap();
        let c = BinnedCounts::new(BinSpec::uniform(0.0, 1.0, 4).unwrap(), vec![0; 4]).unwrap();
        let s = propose_legal(&p, &c, &mut RngStream::new(1).substream(0)).unwrap();
        assert!(s.times.is_empty());
        assert!((s.log_w + 0.7 * 4.0).abs() < 1e-14);
    }

    fn sample_set() -> Vec<WeightedSample> {
        vec![
            WeightedSample { times: EventSequence::new(vec![0.5, 1.2], 3.0).unwrap(), log_w: 0.0 },
            WeightedSample { times: EventSequence::new(vec![0.1, 2.9], 3.0).unwrap(), log_w: 3f64.ln() },
        ]
    }

    #[test]
    fn weighted_q_two_samples() {
        let p = HawkesParams::exponential(0.6, 0.5, 1.5).unwrap();
        let s = sample_set();
        let l1 = loglik(&p, &s[0].times).value;
        let l2 = loglik(&p, &s[1].times).value;
        let q = weighted_q(&p, &s).unwrap();
        assert!((q - (0.25 * l1 + 0.75 * l2)).abs() < 1e-12);
    }

    #[test]
    fn weighted_q_uniform_and_single() {
        let p = HawkesParams::exponential(0.6, 0.5, 1.5).unwrap();
        let mut s = sample_set();
        s[1].log_w = 0.0;
        let mean = 0.5 * (loglik(&p, &s[0].times).value + loglik(&p, &s[1].times).value);
        assert!((weighted_q(&p, &s).unwrap() - mean).abs() < 1e-12);
        let one = &s[..1];
        assert!((weighted_q(&p, one).unwrap() - loglik(&p, &one[0].times).value).abs() < 1e-15);
        assert!(weighted_q(&p, &[]).is_err());
    }

    #[test]
    fn weights_normalize_and_flag_degeneracy() {
        let w = ImportanceWeights::from_log(&[-1000.0, -1001.0, -1002.5]).unwrap();
        assert!((w.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.ess > 1.0 && w.ess <= 3.0);
        assert!(!w.is_degenerate());
        let d = ImportanceWeights::from_log(&[0.0, -800.0]).unwrap();
        assert!(d.is_degenerate());
        assert!(!ImportanceWeights::from_log(&[5.0]).unwrap().is_degenerate());
        assert!(ImportanceWeights::from_log(&[f64::NEG_INFINITY]).is_err());
    }

    #[test]
    fn fit_rejects_all_zero_and_bad_config() {
        let c = BinnedCounts::new(BinSpec::uniform(0.0, 1.0, 5).unwrap(), vec![0; 5]).unwrap();
        assert!(matches!(mcem_fit(&c, &McemConfig::default()), Err(HawkesError::AllZeroCounts)));
        let c = BinnedCounts::new(BinSpec::uniform(0.0, 1.0, 5).unwrap(), vec![1; 5]).unwrap();
        let bad = McemConfig { m: 0, ..Default::default() };
        assert!(matches!(mcem_fit(&c, &bad), Err(HawkesError::Config(_))));
    }

    #[test]
    fn initial_point_is_sorted_and_stationary() {
        for seed in 0..20 {
            let mut rng = RngStream::new(seed).substream(0);
            let p = initial_params(KernelFamily::Exponential, &mut rng);
            let v = p.values();
            assert!(v[0] <= v[1] && v[1] <= v[2] && v.iter().all(|x| (1.0..3.0).contains(x)));
            assert!(p.validate_stationary().is_ok());
            let q = initial_params(KernelFamily::PowerLaw, &mut rng);
            assert!(q.validate_stationary().is_ok());
            let r = initial_params(KernelFamily::Rectangular, &mut rng);
            assert!(r.validate_stationary().is_ok());
        }
    }
}
