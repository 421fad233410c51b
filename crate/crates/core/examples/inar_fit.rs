//! Conditional least squares on binned counts, then an exponential fit to the
//! recovered kernel points.

use hawkes_agg::{aggregate, inar_fit, simulate, BinSpec, HawkesParams, InarConfig, SimConfig};

fn main() -> hawkes_agg::Result<()> {
    let truth = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let events = simulate(&SimConfig::new(truth, 2000.0, 11))?;
    for width in [0.25, 0.5, 1.0] {
        let counts = aggregate(&events, &BinSpec::covering(2000.0, width)?)?;
        let cfg = InarConfig { support: Some(3.0), ..Default::default() };
        match inar_fit(&counts, &cfg) {
            Ok(est) => {
                let g: Vec<String> = est.raw.g_points.iter().take(4).map(|g| format!("{g:.3}")).collect();
                println!(
                    "width {width}: p = {}, g = [{} ...], fit {:?}, boundary {}",
                    est.raw.g_points.len(),
                    g.join(", "),
                    est.fit.params.values(),
                    est.fit.boundary
                );
            }
            Err(e) => println!("width {width}: {e}"),
        }
    }
    Ok(())
}
