//! Evaluate the three kernel families and the conditional intensity.

use hawkes_agg::process::{cif_eval, compensator};
use hawkes_agg::{HawkesParams, Kernel};

fn main() -> hawkes_agg::Result<()> {
    let kernels = [
        Kernel::exponential(1.0, 2.0)?,
        Kernel::power_law(0.6, 1.5, 1.2)?,
        Kernel::rectangular(0.5, 0.2, 1.0)?,
    ];
    for k in &kernels {
        println!("{:?}: branching ratio {:.3}, stationary {}", k.family(), k.branching_ratio(), k.is_stationary());
        for u in [0.05, 0.1, 0.5, 1.0, 3.0] {
            println!("  phi({u}) = {:.5}  int_0^u = {:.5}", k.eval(u), k.integral(u));
        }
    }

    let params = HawkesParams::new(0.5, kernels[0])?;
    let history = [0.3, 0.9, 1.1];
    for t in [1.0, 1.5, 2.5] {
        let past: Vec<f64> = history.iter().copied().filter(|&s| s < t).collect();
        println!("lambda({t}) = {:.4}", cif_eval(&params, &past, t));
    }
    println!("compensator on [0, 3] = {:.4}", compensator(&params, &history, 0.0, 3.0));
    Ok(())
}
