//! A small simulation study: records, summaries and SVG plots in one directory.
//!
//! ```bash
//! cargo run --release --example benchmark -- bench_out
//! ```

use hawkes_agg::bench::{run_experiment, write_outputs, ExperimentConfig, Method};
use hawkes_agg::{HawkesParams, McemConfig};

fn main() -> hawkes_agg::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "bench_out".into());
    let truth = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let mut cfg = ExperimentConfig::new(
        truth,
        vec![0.5, 1.0, 2.0],
        4,
        vec![Method::Inar, Method::Binned, Method::Mcem, Method::ContinuousOracle],
    );
    cfg.horizon = 300.0;
    cfg.mcem = McemConfig { m: 20, max_em_iters: 15, ..Default::default() };
    cfg.output_dir = dir.into();

    let records = run_experiment(&cfg)?;
    let summary = write_outputs(&cfg, &records)?;
    for row in summary.rows.iter().filter(|r| r.parameter == "alpha") {
        if let Some(s) = &row.stats {
            let delta = row.delta.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
            println!("{:<18} {delta:>4}  median {:>7.3}  mean |bias| {:.3}", row.method, s.median, s.mean_abs_bias);
        }
    }
    println!("outputs in {}", cfg.output_dir.display());
    Ok(())
}
