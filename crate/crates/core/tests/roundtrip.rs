use hawkes_agg::bench::{ExperimentConfig, FitConfig, Method};
use hawkes_agg::io::{read_counts_csv, read_events_csv, write_counts_csv, write_events_csv};
use hawkes_agg::optimize::Reparam;
use hawkes_agg::{aggregate, mcem_fit, simulate, BinSpec, HawkesParams, Kernel, KernelFamily, McemConfig, McemTrace, SimConfig};
use proptest::prelude::*;

#[test]
fn experiment_config_json() {
    let truth = HawkesParams::new(0.3, Kernel::power_law(0.4, 1.5, 0.9).unwrap()).unwrap();
    let mut cfg = ExperimentConfig::new(truth, vec![0.5, 2.0], 7, vec![Method::Binned, Method::ContinuousOracle]);
    cfg.mcem.family = KernelFamily::PowerLaw;
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
    assert!(back.validate().is_ok());

    let fit: FitConfig = serde_json::from_str("{}").unwrap();
    assert_eq!(fit.methods, vec![Method::Mcem]);
}

#[test]
fn trace_json() {
    let p = HawkesParams::exponential(0.6, 0.6, 1.8).unwrap();
    let ev = simulate(&SimConfig::new(p, 60.0, 3)).unwrap();
    let counts = aggregate(&ev, &BinSpec::covering(60.0, 1.0).unwrap()).unwrap();
    let fit = mcem_fit(&counts, &McemConfig { m: 8, max_em_iters: 4, ..Default::default() }).unwrap();
    let back: McemTrace = serde_json::from_str(&fit.trace.to_json().unwrap()).unwrap();
    assert_eq!(back, fit.trace);
    assert_eq!(back.iterates.len(), back.q_values.len() + 1);
    assert!(back.ess.iter().all(|e| *e >= 1.0 - 1e-9 && *e <= 8.0 + 1e-9));
}

#[test]
fn events_and_counts_csv() {
    let p = HawkesParams::exponential(1.0, 0.5, 1.0).unwrap();
    let ev = simulate(&SimConfig::new(p, 40.0, 8)).unwrap();
    let mut buf = Vec::new();
    write_events_csv(&ev, &mut buf).unwrap();
    assert_eq!(read_events_csv(buf.as_slice()).unwrap(), ev);

    let counts = aggregate(&ev, &BinSpec::covering(40.0, 0.8).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_counts_csv(&counts, &mut buf).unwrap();
    assert_eq!(read_counts_csv(buf.as_slice()).unwrap(), counts);
}

proptest! {
    #[test]
    fn decoded_iterates_are_feasible(x in prop::collection::vec(-60.0..60.0f64, 4), family in 0usize..3) {
        let family = [KernelFamily::Exponential, KernelFamily::PowerLaw, KernelFamily::Rectangular][family];
        let r = Reparam::new(family);
        let p = r.decode(&x[..r.dim()]);
        prop_assert!(p.validate().is_ok(), "{:?}", p);
        prop_assert!(p.branching_ratio() < 1.0, "{:?}", p);
    }
}
