//! Monte Carlo EM on binned counts; writes the iteration trace as JSON.
//!
//! ```bash
//! cargo run --release --example mcem_fit -- trace.json
//! ```

use hawkes_agg::{aggregate, mcem_fit, simulate, BinSpec, HawkesParams, McemConfig, SimConfig};

fn main() -> hawkes_agg::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "mcem_trace.json".into());
    let truth = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let events = simulate(&SimConfig::new(truth, 300.0, 2))?;
    let counts = aggregate(&events, &BinSpec::covering(300.0, 1.0)?)?;

    let cfg = McemConfig { m: 30, max_em_iters: 25, seed: 9, ..Default::default() };
    let fit = mcem_fit(&counts, &cfg)?;
    println!("start {:.4?}", fit.trace.iterates[0].values());
    for (i, (p, q)) in fit.trace.iterates.iter().skip(1).zip(&fit.trace.q_values).enumerate() {
        println!("iter {:>2}: {:.4?}  Q = {q:.3}  ess = {:.1}", i + 1, p.values(), fit.trace.ess[i]);
    }
    println!("final {:?}, converged {}", fit.params.values(), fit.trace.converged);
    std::fs::write(&out, fit.trace.to_json()?)?;
    println!("trace written to {out}");
    Ok(())
}
