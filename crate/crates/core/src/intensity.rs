//! Incremental intensity bookkeeping along a growing history.
//!
//! The simulator and the latent-time sampler both walk forward in time,
//! appending events and repeatedly asking for `λ*(t)` and `∫ λ*` from the
//! latest event onward. For the exponential kernel this is O(1) per query via
//! the recursion `A(t_i) = e^{-β(t_i - t_{i-1})}(1 + A(t_{i-1}))`; other
//! kernels fall back to summing over the stored history.

use serde::{Deserialize, Serialize};

use crate::kernels::{HawkesParams, Kernel};
use crate::process;

/// Recursion state `A(last) = Σ_{t_j < last} exp(-β(last - t_j))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExcitationState {
    pub a: f64,
    pub last_time: Option<f64>,
}

impl ExcitationState {
    /// Appends an event at `t >= last_time`.
    pub fn push(&mut self, beta: f64, t: f64) {
        if let Some(last) = self.last_time {
            self.a = (1.0 + self.a) * (-beta * (t - last)).exp();
        }
        self.last_time = Some(t);
    }

    /// `Σ_j exp(-β(t - t_j))` over all recorded events, for `t > last_time`.
    pub fn decayed(&self, beta: f64, t: f64) -> f64 {
        match self.last_time {
            Some(last) => (1.0 + self.a) * (-beta * (t - last)).exp(),
            None => 0.0,
        }
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Exponential { alpha: f64, beta: f64, state: ExcitationState },
    Generic { times: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct IntensityTracker {
    nu: f64,
    kernel: Kernel,
    inner: Inner,
    last: Option<f64>,
}

impl IntensityTracker {
    pub fn new(params: &HawkesParams) -> Self {
        let inner = match params.kernel {
            Kernel::Exponential { alpha, beta } => {
                Inner::Exponential { alpha, beta, state: ExcitationState::default() }
            }
            _ => Inner::Generic { times: Vec::new() },
        };
        IntensityTracker { nu: params.nu, kernel: params.kernel, inner, last: None }
    }

    /// Starts from an existing history (sorted ascending).
    pub fn with_history(params: &HawkesParams, history: &[f64]) -> Self {
        let mut tr = Self::new(params);
        for &t in history {
            tr.record(t);
        }
        tr
    }

    pub fn record(&mut self, t: f64) {
        debug_assert!(self.last.is_none_or(|l| t >= l));
        match &mut self.inner {
            Inner::Exponential { beta, state, .. } => state.push(*beta, t),
            Inner::Generic { times } => times.push(t),
        }
        self.last = Some(t);
    }

    pub fn last_event(&self) -> Option<f64> {
        self.last
    }

    /// The recursion state when the kernel is exponential.
    pub fn exponential_state(&self) -> Option<ExcitationState> {
        match &self.inner {
            Inner::Exponential { state, .. } => Some(*state),
            Inner::Generic { .. } => None,
        }
    }

    fn generic_params(&self) -> HawkesParams {
        HawkesParams { nu: self.nu, kernel: self.kernel }
    }

    /// Index of the first stored event that can still influence times `>= s`.
    fn live_from(times: &[f64], kernel: &Kernel, s: f64) -> usize {
        match *kernel {
            Kernel::Rectangular { b, .. } => times.partition_point(|&tj| tj < s - b),
            _ => 0,
        }
    }

    /// `λ*(t)` for `t` after the last recorded event.
    pub fn intensity(&self, t: f64) -> f64 {
        match &self.inner {
            Inner::Exponential { alpha, beta, state } => self.nu + alpha * state.decayed(*beta, t),
            Inner::Generic { times } => {
                let from = Self::live_from(times, &self.kernel, t);
                process::cif_eval(&self.generic_params(), &times[from..], t)
            }
        }
    }

    /// `∫ₛᵗ λ*(u) du` for `last_event <= s <= t`.
    pub fn compensator(&self, s: f64, t: f64) -> f64 {
        if t <= s {
            return 0.0;
        }
        match &self.inner {
            Inner::Exponential { alpha, beta, state } => {
                let ds = state.decayed(*beta, s);
                // ds · (1 − e^{−β(t−s)})
                self.nu * (t - s) - (alpha / beta) * ds * (-beta * (t - s)).exp_m1()
            }
            Inner::Generic { times } => {
                let from = Self::live_from(times, &self.kernel, s);
                process::compensator(&self.generic_params(), &times[from..], s, t)
            }
        }
    }

    /// An upper bound on `λ*` over `(s, until]` given the recorded history.
    pub fn dominating_rate(&self, s: f64, until: f64) -> f64 {
        match &self.inner {
            Inner::Exponential { alpha, beta, state } => {
                let right_limit = match state.last_time {
                    Some(last) => (1.0 + state.a) * (-beta * (s - last)).exp(),
                    None => 0.0,
                };
                self.nu + alpha * right_limit
            }
            Inner::Generic { times } => {
                let from = Self::live_from(times, &self.kernel, s);
                self.nu
                    + times[from..]
                        .iter()
                        .map(|&tj| self.kernel.sup_on(s - tj, until - tj))
                        .sum::<f64>()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<HawkesParams> {
        vec![
            HawkesParams::exponential(0.5, 0.9, 2.0).unwrap(),
            HawkesParams::new(0.5, Kernel::power_law(0.3, 2.0, 0.6).unwrap()).unwrap(),
            HawkesParams::new(0.5, Kernel::rectangular(0.6, 0.1, 0.9).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn tracker_matches_direct_formulas() {
        let hist = [0.3, 0.35, 1.2, 2.0, 4.1];
        for p in families() {
            let tr = IntensityTracker::with_history(&p, &hist);
            for &(s, t) in &[(4.1, 4.2), (4.5, 6.0), (5.0, 5.05)] {
                let a = tr.compensator(s, t);
                let b = process::compensator(&p, &hist, s, t);
                assert!((a - b).abs() < 1e-12, "{p:?}: {a} vs {b}");
                let ia = tr.intensity(t);
                let ib = process::cif_eval(&p, &hist, t);
                assert!((ia - ib).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dominating_rate_bounds_intensity() {
        let hist = [0.3, 0.35, 1.2, 2.0, 4.1];
        for p in families() {
            let tr = IntensityTracker::with_history(&p, &hist);
            let s = 4.1;
            let until = 7.0;
            let m = tr.dominating_rate(s, until);
            for i in 1..=300 {
                let t = s + (until - s) * i as f64 / 300.0;
                assert!(tr.intensity(t) <= m * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn excitation_state_recursion() {
        let beta = 1.3;
        let ts = [0.5, 0.9, 2.4];
        let mut st = ExcitationState::default();
        for &t in &ts {
            st.push(beta, t);
        }
        let direct: f64 = ts[..2].iter().map(|&tj| (-beta * (2.4 - tj)).exp()).sum();
        assert!((st.a - direct).abs() < 1e-15);
    }
}
