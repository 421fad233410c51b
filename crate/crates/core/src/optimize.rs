//! Derivative-free maximization over Hawkes parameters.
//!
//! The search runs in an unconstrained space that decodes to strictly
//! feasible parameters:
//!
//! - exponential: `nu = e^x0`, `beta = e^x2`, `alpha = beta * sigmoid(x1)`
//! - power-law: `nu = e^x0`, `beta = e^x2`, `c = e^x3`, `alpha = c * sigmoid(x1)`
//! - rectangular: `nu = e^x0`, `n = sigmoid(x1)`, `a = e^x2`, `b = a + e^x3`
//!
//! so every decoded iterate has `nu > 0` and branching ratio below
//! `1 - 1e-12`. The solver is a classic Nelder–Mead simplex (reflection 1,
//! expansion 2, contraction 0.5, shrink 0.5).

use crate::error::{HawkesError, Result};
use crate::kernels::{HawkesParams, Kernel, KernelFamily};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 5000;
/// Largest branching ratio a decoded iterate can have.
pub const GAMMA_CAP: f64 = 1.0 - 1e-12;
/// Decoded ratios this close to 0 or 1 are reported as boundary estimates.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub tolerance: f64,
    pub max_iters: usize,
    /// Edge length of the initial simplex along each axis.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
            initial_step: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iters: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the Nelder–Mead simplex.
///
/// Converged when both the spread of objective values and the largest
/// coordinate distance from the best vertex fall below `tolerance`.
/// Non-finite values are treated as `+inf`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evaluations);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }

    let mut iters = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let f_spread = if best.is_finite() && worst.is_finite() { worst - best } else { f64::INFINITY };
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if f_spread < opts.tolerance && x_spread < opts.tolerance {
            converged = true;
            break;
        }
        if iters >= opts.max_iters {
            break;
        }
        iters += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let toward = |coef: f64, from: &[f64]| -> Vec<f64> {
            centroid.iter().zip(from).map(|(c, w)| c + coef * (c - w)).collect()
        };
        let worst_x = simplex[n].0.clone();
        let xr = toward(1.0, &worst_x);
        let fr = eval(&xr, &mut evaluations);
        if fr < best {
            let xe = toward(2.0, &worst_x);
            let fe = eval(&xe, &mut evaluations);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < worst {
            let xc: Vec<f64> = centroid.iter().zip(&xr).map(|(c, r)| c + 0.5 * (r - c)).collect();
            let fc = eval(&xc, &mut evaluations);
            (xc, fc, fc <= fr)
        } else {
            let xc = toward(-0.5, &worst_x);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc, fc < worst)
        };
        if accept {
            simplex[n] = (xc, fc);
            continue;
        }
        let best_x = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best_x) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            *v = eval(x, &mut evaluations);
        }
    }
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iters, evaluations, converged }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn bounded_exp(x: f64) -> f64 {
    x.clamp(-700.0, 700.0).exp()
}

fn ratio(x: f64) -> f64 {
    sigmoid(x).clamp(f64::MIN_POSITIVE, GAMMA_CAP)
}

/// Maps parameters of one kernel family to and from the unconstrained space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reparam {
    pub family: KernelFamily,
}

impl Reparam {
    pub fn new(family: KernelFamily) -> Self {
        Reparam { family }
    }

    pub fn dim(&self) -> usize {
        1 + self.family.arity()
    }

    pub fn decode(&self, x: &[f64]) -> HawkesParams {
        let nu = bounded_exp(x[0]);
        let kernel = match self.family {
            KernelFamily::Exponential => {
                let beta = bounded_exp(x[2]);
                Kernel::Exponential { alpha: beta * ratio(x[1]), beta }
            }
            KernelFamily::PowerLaw => {
                let c = bounded_exp(x[3]);
                Kernel::PowerLaw { alpha: c * ratio(x[1]), beta: bounded_exp(x[2]), c }
            }
            KernelFamily::Rectangular => {
                let a = bounded_exp(x[2]);
                Kernel::Rectangular { n: ratio(x[1]), a, b: (a + bounded_exp(x[3])).max(a.next_up()) }
            }
        };
        HawkesParams { nu, kernel }
    }

    /// Inverse of [`Reparam::decode`]; the ratio is clamped into `(0, 1)` and
    /// a zero rectangular onset is nudged to `1e-6`.
    pub fn encode(&self, p: &HawkesParams) -> Result<Vec<f64>> {
        if p.family() != self.family {
            return Err(HawkesError::InvalidParams(format!(
                "expected a {} kernel, got {}",
                self.family,
                p.family()
            )));
        }
        let clamp_ratio = |r: f64| logit(r.clamp(1e-12, GAMMA_CAP));
        let x = match p.kernel {
            Kernel::Exponential { alpha, beta } => vec![p.nu.ln(), clamp_ratio(alpha / beta), beta.ln()],
            Kernel::PowerLaw { alpha, beta, c } => {
                vec![p.nu.ln(), clamp_ratio(alpha / c), beta.ln(), c.ln()]
            }
            Kernel::Rectangular { n, a, b } => {
                let a = a.max(1e-6);
                vec![p.nu.ln(), clamp_ratio(n), a.ln(), (b - a).max(1e-6).ln()]
            }
        };
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(HawkesError::InvalidParams(format!("cannot encode {p:?}")))
        }
    }
}

/// A maximization problem over one kernel family.
pub struct OptProblem<F: Fn(&HawkesParams) -> f64> {
    pub objective: F,
    pub family: KernelFamily,
    pub start: HawkesParams,
    pub tolerance: f64,
    pub max_iters: usize,
}

impl<F: Fn(&HawkesParams) -> f64> OptProblem<F> {
    pub fn new(objective: F, start: HawkesParams) -> Self {
        OptProblem {
            objective,
            family: start.family(),
            start,
            tolerance: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub params: HawkesParams,
    pub objective_value: f64,
    pub converged: bool,
    pub iters: usize,
    /// The branching ratio sits at the feasibility cap (or at ~0).
    pub boundary: bool,
}

pub fn is_boundary(p: &HawkesParams) -> bool {
    let g = p.branching_ratio();
    g >= 1.0 - BOUNDARY_MARGIN || g <= BOUNDARY_MARGIN
}

/// Locally maximizes `problem.objective` from `problem.start`.
pub fn maximize<F: Fn(&HawkesParams) -> f64>(problem: &OptProblem<F>) -> Result<OptResult> {
    let rp = Reparam::new(problem.family);
    let start_value = (problem.objective)(&problem.start);
    if !start_value.is_finite() {
        return Err(HawkesError::ObjectiveNonFinite);
    }
    let x0 = rp.encode(&problem.start)?;
    let opts = NelderMeadOptions {
        tolerance: problem.tolerance,
        max_iters: problem.max_iters,
        ..Default::default()
    };
    let m = minimize(|x| -(problem.objective)(&rp.decode(x)), &x0, &opts);
    let params = rp.decode(&m.x);
    debug_assert!(params.nu > 0.0 && params.branching_ratio() < 1.0);
    // The encoded start may differ from the raw start by rounding; never
    // report worse than what we were handed.
    let (params, value) = if -m.value >= start_value {
        (params, -m.value)
    } else {
        (problem.start, start_value)
    };
    Ok(OptResult {
        params,
        objective_value: value,
        converged: m.converged,
        iters: m.iters,
        boundary: is_boundary(&params),
    })
}

/// Runs [`maximize`] from each start and keeps the best result.
///
/// Starts whose objective is not finite are skipped; if none is usable the
/// error is `ObjectiveNonFinite`.
pub fn maximize_multistart<F: Fn(&HawkesParams) -> f64>(
    objective: F,
    starts: &[HawkesParams],
    tolerance: f64,
    max_iters: usize,
) -> Result<OptResult> {
    let mut best: Option<OptResult> = None;
    for start in starts {
        let problem = OptProblem {
            objective: &objective,
            family: start.family(),
            start: *start,
            tolerance,
            max_iters,
        };
        match maximize(&problem) {
            Ok(r) => {
                if best.as_ref().is_none_or(|b| r.objective_value > b.objective_value) {
                    best = Some(r);
                }
            }
            Err(HawkesError::ObjectiveNonFinite) => continue,
            Err(e) => return Err(e),
        }
    }
    best.ok_or(HawkesError::ObjectiveNonFinite)
}

/// Multi-start initial points around a moment-matched guess.
///
/// `rate` is the observed mean event rate and `time_scale` a typical time
/// resolution (bin width, or mean inter-event gap). The first three starts
/// use branching ratio 0.5, `nu = rate * 0.5` and decay scales
/// `{0.5, 1, 2} / time_scale`; the rest are jittered copies drawn from `rng`.
pub fn moment_starts(
    family: KernelFamily,
    rate: f64,
    time_scale: f64,
    count: usize,
    rng: &mut crate::rng::Rng,
) -> Vec<HawkesParams> {
    use rand::Rng as _;
    let base_betas = [0.5, 1.0, 2.0];
    (0..count.max(1))
        .map(|i| {
            let (gamma, scale, nu_jitter) = if i < base_betas.len() {
                (0.5, base_betas[i], 1.0)
            } else {
                (
                    rng.gen_range(0.3..0.7),
                    base_betas[i % base_betas.len()] * rng.gen_range(0.7..1.4),
                    rng.gen_range(0.8..1.25),
                )
            };
            let nu = (rate * (1.0 - gamma) * nu_jitter).max(1e-6);
            let beta = scale / time_scale;
            let kernel = match family {
                KernelFamily::Exponential => Kernel::Exponential { alpha: gamma * beta, beta },
                KernelFamily::PowerLaw => Kernel::PowerLaw { alpha: gamma, beta, c: 1.0 },
                KernelFamily::Rectangular => {
                    let a = 0.01 * time_scale;
                    Kernel::Rectangular { n: gamma, a, b: a + 1.0 / beta }
                }
            };
            HawkesParams { nu, kernel }
        })
        .collect()
}
