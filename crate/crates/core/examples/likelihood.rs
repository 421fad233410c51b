//! Continuous and binned log-likelihoods on the same simulated path.

use hawkes_agg::likelihood::{loglik_continuous, loglik_exponential_recursive};
use hawkes_agg::{aggregate, binned_loglik, simulate, BinSpec, HawkesParams, SimConfig};

fn main() -> hawkes_agg::Result<()> {
    let truth = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let events = simulate(&SimConfig::new(truth, 200.0, 3))?;
    let counts = aggregate(&events, &BinSpec::covering(200.0, 1.0)?)?;

    let recursive = loglik_exponential_recursive(&truth, &events).checked()?;
    let direct = loglik_continuous(&truth, &events).checked()?;
    println!("continuous: recursive {recursive:.9}, direct {direct:.9}");

    // Profile over alpha with nu and beta held at the truth.
    for alpha in [0.5, 0.8, 1.0, 1.2, 1.5] {
        let p = HawkesParams::exponential(0.5, alpha, 2.0)?;
        println!(
            "alpha {alpha:.1}: continuous {:>10.3}  binned {:>10.3}",
            loglik_exponential_recursive(&p, &events).or_neg_inf(),
            binned_loglik(&p, &counts).or_neg_inf()
        );
    }
    Ok(())
}
