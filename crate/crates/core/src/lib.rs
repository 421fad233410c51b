//! Estimating Hawkes process parameters from aggregated (binned) event counts.
//!
//! The crate simulates Hawkes processes, aggregates the events into bins and
//! fits the parameters back with three estimators: INAR(p) least squares,
//! a binned Poisson MLE and Monte Carlo EM over the latent event times. The
//! [`bench`] module runs them side by side over many replicates.

pub mod bench;
pub mod binned;
pub mod continuous;
pub mod error;
pub mod inar;
pub mod intensity;
pub mod io;
pub mod kernels;
pub mod likelihood;
pub mod mcem;
pub mod optimize;
pub mod process;
pub mod rng;
pub mod simulate;

pub use binned::{binned_mle, BinnedMleResult, MleOptions};
pub use continuous::continuous_mle;
pub use error::{HawkesError, Result};
pub use inar::{inar_fit, InarConfig, InarEstimate};
pub use kernels::{HawkesParams, Kernel, KernelFamily};
pub use likelihood::{binned_loglik, loglik, LogLik};
pub use mcem::{mcem_fit, McemConfig, McemResult, McemTrace};
pub use process::{aggregate, BinSpec, BinnedCounts, EventSequence};
pub use simulate::{simulate, SimConfig};
