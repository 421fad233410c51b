//! Maximum likelihood on binned counts next to the continuous-time fit.

use hawkes_agg::{aggregate, binned_mle, continuous_mle, simulate, BinSpec, HawkesParams, KernelFamily, MleOptions, SimConfig};

fn main() -> hawkes_agg::Result<()> {
    let truth = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let events = simulate(&SimConfig::new(truth, 1000.0, 5))?;
    let opts = MleOptions::default();

    let cont = continuous_mle(&events, KernelFamily::Exponential, &opts)?;
    println!("continuous: {:?} loglik {:.3}", cont.params.values(), cont.loglik);
    for width in [0.5, 1.0, 2.0] {
        let counts = aggregate(&events, &BinSpec::covering(1000.0, width)?)?;
        let fit = binned_mle(&counts, KernelFamily::Exponential, &opts)?;
        println!(
            "binned {width}: {:?} loglik {:.3} converged {} boundary {}",
            fit.params.values(),
            fit.loglik,
            fit.converged,
            fit.boundary
        );
    }
    Ok(())
}
