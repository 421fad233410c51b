//! Simulate an exponential Hawkes process by thinning and aggregate it into
//! unit-width bins.
//!
//! ```bash
//! cargo run --example simulate_and_bin
//! ```

use hawkes_agg::{aggregate, simulate, BinSpec, HawkesParams, SimConfig};

fn main() -> hawkes_agg::Result<()> {
    let params = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let events = simulate(&SimConfig::new(params, 1000.0, 7))?;
    println!("{} events, stationary rate {:.3}, observed rate {:.3}",
        events.len(), params.stationary_rate(), events.len() as f64 / events.window_end());

    for width in [0.25, 1.0, 4.0] {
        let counts = aggregate(&events, &BinSpec::covering(1000.0, width)?)?;
        let empty = counts.counts().iter().filter(|&&c| c == 0).count();
        println!("width {width:>5}: {} bins, max count {}, {empty} empty", counts.len(), counts.max_count());
    }
    Ok(())
}
