//! Log-likelihoods and the one-step conditional density of the next event.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::kernels::{HawkesParams, Kernel};
use crate::process::{self, BinnedCounts, EventSequence};

pub use crate::intensity::ExcitationState;

/// A log-likelihood value together with a finiteness flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLik {
    pub value: f64,
    pub finite: bool,
}

impl LogLik {
    pub fn new(value: f64) -> Self {
        LogLik { value, finite: value.is_finite() }
    }

    /// The value, or `NonFiniteLogLik`.
    pub fn checked(self) -> Result<f64> {
        if self.finite {
            Ok(self.value)
        } else {
            Err(HawkesError::NonFiniteLogLik)
        }
    }

    /// The value, with non-finite results mapped to `-inf` (for optimizers).
    pub fn or_neg_inf(self) -> f64 {
        if self.finite {
            self.value
        } else {
            f64::NEG_INFINITY
        }
    }
}

fn log_positive(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `Σ log λ*(t_j) − ∫₀ᵀ λ*`, evaluated directly in O(N²) for any kernel.
pub fn loglik_continuous(params: &HawkesParams, events: &EventSequence) -> LogLik {
    let t = events.times();
    let k = &params.kernel;
    let mut sum_log = 0.0;
    for i in 0..t.len() {
        let lambda = params.nu + t[..i].iter().map(|&tj| k.eval(t[i] - tj)).sum::<f64>();
        sum_log += log_positive(lambda);
    }
    let end = events.window_end();
    let comp = params.nu * end + t.iter().map(|&tj| k.integral(end - tj)).sum::<f64>();
    LogLik::new(sum_log - comp)
}

/// The same quantity for the exponential kernel via the O(N) recursion
/// `A_i = e^{-β(t_i − t_{i−1})}(1 + A_{i−1})`.
///
/// Other kernels fall back to [`loglik_continuous`].
pub fn loglik_exponential_recursive(params: &HawkesParams, events: &EventSequence) -> LogLik {
    match params.kernel {
        Kernel::Exponential { alpha, beta } => {
            LogLik::new(exp_loglik_raw(params.nu, alpha, beta, events.times(), events.window_end()))
        }
        _ => loglik_continuous(params, events),
    }
}

/// Recursive exponential log-likelihood on raw sorted times.
pub(crate) fn exp_loglik_raw(nu: f64, alpha: f64, beta: f64, times: &[f64], end: f64) -> f64 {
    let mut state = ExcitationState::default();
    let mut sum_log = 0.0;
    for &ti in times {
        state.push(beta, ti);
        sum_log += log_positive(nu + alpha * state.a);
    }
    // Σ_j (1 − e^{−β(T − t_j)}) = N − e^{−β(T − t_N)}(1 + A_N)
    let tail = match state.last_time {
        Some(last) => (1.0 + state.a) * (-beta * (end - last)).exp(),
        None => 0.0,
    };
    sum_log - nu * end - (alpha / beta) * (times.len() as f64 - tail)
}

/// Fastest available continuous log-likelihood for the kernel.
pub fn loglik(params: &HawkesParams, events: &EventSequence) -> LogLik {
    loglik_exponential_recursive(params, events)
}

/// `log f*(t) = log λ*(t) − ∫_{t_prev}^t λ*` for the next event after `t_prev`.
pub fn conditional_pdf_log(params: &HawkesParams, history: &[f64], t_prev: f64, t: f64) -> f64 {
    log_positive(process::cif_eval(params, history, t))
        - process::compensator(params, history, t_prev, t)
}

/// `F*(t) = 1 − exp(−∫_{t_prev}^t λ*)`.
pub fn conditional_cdf(params: &HawkesParams, history: &[f64], t_prev: f64, t: f64) -> f64 {
    -(-process::compensator(params, history, t_prev, t)).exp_m1()
}

/// Piecewise-constant-intensity log-likelihood of bin counts:
/// `Σ_j N_j log(Δ_j λ_j) − Δ_j λ_j`.
///
/// `λ_j` is the intensity at the left edge of bin `j`, with every event of an
/// earlier bin `i` placed at that bin's left edge:
/// `λ_j = ν + Σ_{i<j} N_i g(lower_j − lower_i)`. On a uniform grid the lag is
/// `(j − i)Δ`. Within-bin excitation is ignored.
pub fn binned_loglik(params: &HawkesParams, counts: &BinnedCounts) -> LogLik {
    let spec = counts.spec();
    let n = counts.counts();
    let mut total = 0.0;
    let mut add = |j: usize, lambda: f64| {
        let rate = spec.width(j) * lambda;
        if n[j] > 0 {
            total += n[j] as f64 * log_positive(rate);
        }
        total -= rate;
    };
    match params.kernel {
        Kernel::Exponential { alpha, beta } => {
            // s_j = Σ_{i<j} N_i e^{−β(lower_j − lower_i)}
            let mut s = 0.0;
            for j in 0..n.len() {
                if j > 0 {
                    s = (s + n[j - 1] as f64) * (-beta * (spec.lower(j) - spec.lower(j - 1))).exp();
                }
                add(j, params.nu + alpha * s);
            }
        }
        ref k => {
            for j in 0..n.len() {
                let lj = spec.lower(j);
                let excite: f64 = (0..j)
                    .filter(|&i| n[i] > 0)
                    .map(|i| n[i] as f64 * k.eval(lj - spec.lower(i)))
                    .sum();
                add(j, params.nu + excite);
            }
        }
    }
    LogLik::new(total)
}
