//! Event sequences, bins, and the conditional intensity.
//!
//! Bin membership is half-open: an event at `t` falls in bin `j` when
//! `edges[j] <= t < edges[j + 1]`. The intensity at `t` counts only events
//! strictly before `t` (left limit).

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::kernels::HawkesParams;

/// Strictly increasing event times on the window `(0, window_end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEvents")]
pub struct EventSequence {
    times: Vec<f64>,
    window_end: f64,
}

#[derive(Deserialize)]
struct RawEvents {
    times: Vec<f64>,
    window_end: f64,
}

impl TryFrom<RawEvents> for EventSequence {
    type Error = HawkesError;

    fn try_from(raw: RawEvents) -> Result<Self> {
        EventSequence::new(raw.times, raw.window_end)
    }
}

impl EventSequence {
    pub fn new(times: Vec<f64>, window_end: f64) -> Result<Self> {
        if !(window_end.is_finite() && window_end > 0.0) {
            return Err(HawkesError::InvalidEvents(format!(
                "window end must be finite and > 0, got {window_end}"
            )));
        }
        if let Some(&first) = times.first() {
            if !(first > 0.0) {
                return Err(HawkesError::InvalidEvents(format!(
                    "event times must be > 0, got {first}"
                )));
            }
        }
        if let Some(w) = times.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(HawkesError::InvalidEvents(format!(
                "event times must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(&last) = times.last() {
            if !(last <= window_end) {
                return Err(HawkesError::InvalidEvents(format!(
                    "event at {last} lies beyond the window end {window_end}"
                )));
            }
        }
        Ok(EventSequence { times, window_end })
    }

    pub fn empty(window_end: f64) -> Result<Self> {
        Self::new(Vec::new(), window_end)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn window_end(&self) -> f64 {
        self.window_end
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Keeps events strictly before `end` and shrinks the window to `end`.
    pub fn restrict(&self, end: f64) -> Result<Self> {
        let cut = self.times.partition_point(|&t| t < end);
        Self::new(self.times[..cut].to_vec(), end)
    }

    pub fn into_times(self) -> Vec<f64> {
        self.times
    }
}

/// Ordered bin boundaries `b_0 < b_1 < ... < b_K`; widths may differ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBins")]
pub struct BinSpec {
    edges: Vec<f64>,
}

#[derive(Deserialize)]
struct RawBins {
    edges: Vec<f64>,
}

impl TryFrom<RawBins> for BinSpec {
    type Error = HawkesError;

    fn try_from(raw: RawBins) -> Result<Self> {
        BinSpec::new(raw.edges)
    }
}

impl BinSpec {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(HawkesError::InvalidBins("need at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) || edges[0] < 0.0 {
            return Err(HawkesError::InvalidBins("edges must be finite and >= 0".into()));
        }
        if let Some(w) = edges.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(HawkesError::InvalidBins(format!(
                "edges must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(BinSpec { edges })
    }

    /// `bins` bins of equal `width` starting at `origin`.
    pub fn uniform(origin: f64, width: f64, bins: usize) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || bins == 0 {
            return Err(HawkesError::InvalidBins(format!(
                "uniform bins need width > 0 and at least one bin, got width {width}, {bins} bins"
            )));
        }
        Self::new((0..=bins).map(|j| origin + width * j as f64).collect())
    }

    /// `floor(horizon / width)` bins of width `width` from 0.
    pub fn covering(horizon: f64, width: f64) -> Result<Self> {
        let bins = (horizon / width + 1e-9).floor() as usize;
        Self::uniform(0.0, width, bins)
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lower(&self, j: usize) -> f64 {
        self.edges[j]
    }

    pub fn upper(&self, j: usize) -> f64 {
        self.edges[j + 1]
    }

    pub fn width(&self, j: usize) -> f64 {
        self.edges[j + 1] - self.edges[j]
    }

    pub fn start(&self) -> f64 {
        self.edges[0]
    }

    pub fn end(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// The common bin width when all bins agree to within `1e-9` relative.
    pub fn uniform_width(&self) -> Option<f64> {
        let w0 = self.width(0);
        (1..self.len())
            .all(|j| (self.width(j) - w0).abs() <= 1e-9 * w0)
            .then_some(w0)
    }

    /// Index of the bin containing `t`, if any.
    pub fn bin_of(&self, t: f64) -> Option<usize> {
        if t < self.start() || t >= self.end() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= t) - 1)
    }
}

/// Per-bin event counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCounts")]
pub struct BinnedCounts {
    #[serde(flatten)]
    spec: BinSpec,
    counts: Vec<u64>,
}

#[derive(Deserialize)]
struct RawCounts {
    #[serde(flatten)]
    spec: BinSpec,
    counts: Vec<u64>,
}

impl TryFrom<RawCounts> for BinnedCounts {
    type Error = HawkesError;

    fn try_from(raw: RawCounts) -> Result<Self> {
        BinnedCounts::new(raw.spec, raw.counts)
    }
}

impl BinnedCounts {
    pub fn new(spec: BinSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != spec.len() {
            return Err(HawkesError::InvalidBins(format!(
                "{} counts for {} bins",
                counts.len(),
                spec.len()
            )));
        }
        Ok(BinnedCounts { spec, counts })
    }

    pub fn spec(&self) -> &BinSpec {
        &self.spec
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.counts.iter().all(|&n| n == 0)
    }

    pub fn max_count(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// `λ*(t) = ν + Σ_{t_j < t} g(t − t_j)`.
pub fn cif_eval(params: &HawkesParams, history: &[f64], t: f64) -> f64 {
    let end = history.partition_point(|&tj| tj < t);
    params.nu + history[..end].iter().map(|&tj| params.kernel.eval(t - tj)).sum::<f64>()
}

/// `∫ₛᵗ λ*(u) du` with the history held fixed.
///
/// Any history event inside `[s, t)` is accounted for exactly, since
/// `G(u) = 0` for `u <= 0`.
pub fn compensator(params: &HawkesParams, history: &[f64], s: f64, t: f64) -> f64 {
    if t <= s {
        return 0.0;
    }
    let end = history.partition_point(|&tj| tj < t);
    let k = &params.kernel;
    params.nu * (t - s)
        + history[..end]
            .iter()
            .map(|&tj| k.integral(t - tj) - k.integral(s - tj))
            .sum::<f64>()
}

/// Counts events per bin.
pub fn aggregate(events: &EventSequence, spec: &BinSpec) -> Result<BinnedCounts> {
    let mut counts = vec![0u64; spec.len()];
    for &t in events.times() {
        let j = spec.bin_of(t).ok_or(HawkesError::EventOutsideBins {
            time: t,
            lower: spec.start(),
            upper: spec.end(),
        })?;
        counts[j] += 1;
    }
    BinnedCounts::new(spec.clone(), counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use hawkes_oracle::integrate;
    use proptest::prelude::*;

    fn exp_params() -> HawkesParams {
        HawkesParams::exponential(0.5, 0.9, 2.0).unwrap()
    }

    #[test]
    fn cif_examples() {
        let p = exp_params();
        assert_eq!(cif_eval(&p, &[], 3.0), 0.5);
        assert!((cif_eval(&p, &[1.0], 2.0) - 0.621_801_754_9).abs() < 1e-9);
        let r = HawkesParams::new(0.2, Kernel::rectangular(0.5, 0.1, 0.6).unwrap()).unwrap();
        assert_eq!(cif_eval(&r, &[0.0], 0.05), 0.2);
    }

    #[test]
    fn cif_excludes_event_at_t() {
        let p = exp_params();
        assert_eq!(cif_eval(&p, &[1.0], 1.0), 0.5);
    }

    #[test]
    fn compensator_examples() {
        let p = exp_params();
        assert!((compensator(&p, &[], 0.0, 10.0) - 5.0).abs() < 1e-15);
        let expected = 0.5 + 0.45 * ((-2.0f64).exp() - (-4.0f64).exp());
        assert!((compensator(&p, &[0.0], 1.0, 2.0) - expected).abs() < 1e-14);
        assert!((expected - 0.552_658_840).abs() < 1e-9);
        assert_eq!(compensator(&p, &[0.3], 1.5, 1.5), 0.0);
    }

    #[test]
    fn aggregate_examples() {
        let spec = BinSpec::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let ev = EventSequence::new(vec![0.2, 1.7, 1.9], 3.0).unwrap();
        assert_eq!(aggregate(&ev, &spec).unwrap().counts(), &[1, 2, 0]);

        let one = BinSpec::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(aggregate(&EventSequence::empty(1.0).unwrap(), &one).unwrap().counts(), &[0]);

        let two = BinSpec::new(vec![0.0, 1.0, 2.0]).unwrap();
        let edge = EventSequence::new(vec![0.999_999, 1.0], 2.0).unwrap();
        assert_eq!(aggregate(&edge, &two).unwrap().counts(), &[1, 1]);
    }

    #[test]
    fn aggregate_rejects_events_outside() {
        let spec = BinSpec::new(vec![0.0, 1.0]).unwrap();
        let ev = EventSequence::new(vec![1.0], 1.0).unwrap();
        assert!(matches!(aggregate(&ev, &spec), Err(HawkesError::EventOutsideBins { .. })));
    }

    #[test]
    fn validation() {
        assert!(EventSequence::new(vec![1.0, 1.0], 2.0).is_err());
        assert!(EventSequence::new(vec![0.0], 2.0).is_err());
        assert!(EventSequence::new(vec![3.0], 2.0).is_err());
        assert!(EventSequence::new(vec![], 0.0).is_err());
        assert!(BinSpec::new(vec![0.0]).is_err());
        assert!(BinSpec::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(BinnedCounts::new(BinSpec::uniform(0.0, 1.0, 3).unwrap(), vec![1, 2]).is_err());
    }

    #[test]
    fn bins_support_variable_widths() {
        let spec = BinSpec::new(vec![0.0, 0.5, 2.0, 2.25]).unwrap();
        assert_eq!(spec.uniform_width(), None);
        assert_eq!(spec.bin_of(1.99), Some(1));
        assert_eq!(spec.bin_of(2.25), None);
        assert_eq!(BinSpec::covering(1000.0, 0.1).unwrap().len(), 10_000);
        assert_eq!(BinSpec::covering(10.0, 0.25).unwrap().uniform_width(), Some(0.25));
    }

    #[test]
    fn counts_json_shape() {
        let c = BinnedCounts::new(BinSpec::uniform(0.0, 1.0, 2).unwrap(), vec![3, 0]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: BinnedCounts = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<BinnedCounts>(r#"{"spec":{"edges":[0,1]},"counts":[1,2]}"#).is_err());
    }

    fn kernel_strategy() -> impl Strategy<Value = Kernel> {
        prop_oneof![
            (0.1f64..2.0, 0.2f64..4.0).prop_map(|(alpha, beta)| Kernel::Exponential { alpha, beta }),
            (0.1f64..1.0, 0.2f64..4.0, 0.3f64..2.0)
                .prop_map(|(alpha, beta, c)| Kernel::PowerLaw { alpha, beta, c }),
            (0.1f64..0.9, 0.0f64..1.0, 0.1f64..2.0)
                .prop_map(|(n, a, w)| Kernel::Rectangular { n, a, b: a + w }),
        ]
    }

    fn history_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 0..12).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
    }

    proptest! {
        #[test]
        fn compensator_is_additive(k in kernel_strategy(), hist in history_strategy(),
                                   s in 10.0f64..11.0, d1 in 0.0f64..3.0, d2 in 0.0f64..3.0) {
            let p = HawkesParams { nu: 0.7, kernel: k };
            let (t, v) = (s + d1, s + d1 + d2);
            let whole = compensator(&p, &hist, s, v);
            let parts = compensator(&p, &hist, s, t) + compensator(&p, &hist, t, v);
            prop_assert!((whole - parts).abs() <= 1e-10);
        }

        #[test]
        fn compensator_matches_quadrature(k in kernel_strategy(), hist in history_strategy(),
                                          s in 0.0f64..12.0, d in 0.01f64..5.0) {
            let p = HawkesParams { nu: 0.4, kernel: k };
            let t = s + d;
            let mut breaks: Vec<f64> = Vec::new();
            for &tj in &hist {
                breaks.extend(k.breakpoints().iter().map(|b| tj + b));
            }
            let quad = integrate(|u| cif_eval(&p, &hist, u), s, t, &breaks, 1e-12);
            let exact = compensator(&p, &hist, s, t);
            prop_assert!((quad - exact).abs() <= 1e-8 * exact, "quad {quad} exact {exact}");
        }
    }
}
