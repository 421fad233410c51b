use hawkes_agg::mcem::{proposal_log_density, propose_legal, sample_bin, ImportanceWeights, ProposalMode};
use hawkes_agg::rng::RngStream;
use hawkes_agg::{aggregate, BinSpec, BinnedCounts, HawkesParams};
use proptest::prelude::*;
use rand::Rng as _;

#[test]
fn two_event_proposal_density_integrates_to_one() {
    let p = HawkesParams::exponential(0.7, 1.2, 2.5).unwrap();
    let hist = [0.4, 1.1];
    let (lo, hi) = (1.5, 2.5);
    let mut rng = RngStream::new(31).substream(0);
    let n = 100_000;
    let mut acc = 0.0;
    for _ in 0..n {
        let (a, b): (f64, f64) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        let t = [a.min(b), a.max(b)];
        acc += proposal_log_density(&p, &hist, lo, hi, &t).exp();
    }
    let volume = (hi - lo) * (hi - lo) / 2.0;
    let integral = volume * acc / n as f64;
    assert!((integral - 1.0).abs() < 0.02, "{integral}");
}

#[test]
fn joint_mode_is_legal() {
    let p = HawkesParams::exponential(0.5, 1.0, 2.0).unwrap();
    let mut rng = RngStream::new(2).substream(0);
    for n in 1..6u64 {
        let d = sample_bin(&p, &[0.5], 1.0, 2.0, n, ProposalMode::JointMode, &mut rng).unwrap();
        assert_eq!(d.times.len() as u64, n);
        assert!(d.log_q.is_none());
        assert!(d.times.windows(2).all(|w| w[0] < w[1]));
        assert!(d.times.iter().all(|t| (1.0..2.0).contains(t)));
    }
}

fn params() -> impl Strategy<Value = HawkesParams> {
    (0.05..3.0f64, 0.05..0.95f64, 0.2..8.0f64)
        .prop_map(|(nu, ratio, beta)| HawkesParams::exponential(nu, ratio * beta, beta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn proposals_reproduce_the_counts(
        p in params(),
        counts in prop::collection::vec(0u64..5, 1..25),
        width in 0.05..3.0f64,
        seed in any::<u64>(),
    ) {
        let spec = BinSpec::uniform(0.0, width, counts.len()).unwrap();
        let observed = BinnedCounts::new(spec.clone(), counts).unwrap();
        let w = propose_legal(&p, &observed, &mut RngStream::new(seed).substream(0)).unwrap();
        prop_assert!(w.log_w.is_finite());
        let again = aggregate(&w.times, &spec).unwrap();
        prop_assert_eq!(again.counts(), observed.counts());
    }

    #[test]
    fn sequential_draws_stay_in_the_bin(
        p in params(),
        n in 1u64..12,
        lo in 0.0..5.0f64,
        width in 1e-6..2.0f64,
        seed in any::<u64>(),
    ) {
        let hi = lo + width;
        let hist: Vec<f64> = if lo > 0.3 { vec![lo * 0.2, lo * 0.9] } else { vec![] };
        let d = sample_bin(&p, &hist, lo, hi, n, ProposalMode::SequentialSample, &mut RngStream::new(seed).substream(1)).unwrap();
        prop_assert_eq!(d.times.len() as u64, n);
        prop_assert!(d.times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(d.times.iter().all(|t| *t >= lo && *t < hi));
        prop_assert!(d.log_q.unwrap().is_finite());
    }

    #[test]
    fn normalized_weights_sum_to_one(log_w in prop::collection::vec(-800.0..800.0f64, 1..200)) {
        let w = ImportanceWeights::from_log(&log_w).unwrap();
        let total: f64 = w.normalized.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(w.normalized.iter().all(|x| *x >= 0.0));
        prop_assert!(w.ess >= 1.0 - 1e-9 && w.ess <= log_w.len() as f64 + 1e-9);
    }
}
