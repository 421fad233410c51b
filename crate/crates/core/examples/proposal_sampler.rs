//! Draw latent event times inside one bin given the history before it.

use hawkes_agg::mcem::{proposal_log_density, sample_bin, ProposalMode};
use hawkes_agg::rng::RngStream;
use hawkes_agg::HawkesParams;

fn main() -> hawkes_agg::Result<()> {
    let params = HawkesParams::exponential(0.5, 1.0, 2.0)?;
    let history = [0.2, 0.7, 1.6];
    let mut rng = RngStream::new(1).substream(0);
    for _ in 0..3 {
        let draw = sample_bin(&params, &history, 2.0, 3.0, 3, ProposalMode::SequentialSample, &mut rng)?;
        let lq = proposal_log_density(&params, &history, 2.0, 3.0, &draw.times);
        println!("{:.4?}  log q = {lq:.4}", draw.times);
    }
    let mode = sample_bin(&params, &history, 2.0, 3.0, 3, ProposalMode::JointMode, &mut rng)?;
    println!("joint mode: {:.4?}", mode.times);
    Ok(())
}
