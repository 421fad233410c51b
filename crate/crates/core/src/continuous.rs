//! Maximum likelihood from exact event times.
//!
//! Only possible when the latent times are known, so it serves as the
//! reference the aggregated-data estimators are judged against.

use crate::error::{HawkesError, Result};
use crate::binned::{BinnedMleResult, MleOptions};
use crate::kernels::KernelFamily;
use crate::likelihood::loglik;
use crate::optimize::{maximize_multistart, moment_starts};
use crate::process::EventSequence;
use crate::rng::RngStream;

pub fn continuous_mle(events: &EventSequence, family: KernelFamily, opts: &MleOptions) -> Result<BinnedMleResult> {
    if events.is_empty() {
        return Err(HawkesError::AllZeroCounts);
    }
    let rate = events.len() as f64 / events.window_end();
    let mut rng = RngStream::new(opts.seed).substream(0);
    let starts = moment_starts(family, rate, 1.0 / rate, opts.starts, &mut rng);
    let r = maximize_multistart(|p| loglik(p, events).or_neg_inf(), &starts, opts.tolerance, opts.max_iters)?;
    Ok(BinnedMleResult { params: r.params, loglik: r.objective_value, converged: r.converged, boundary: r.boundary })
}
