//! Excitation kernels and model parameters.
//!
//! Three kernel families are supported:
//!
//! | family        | `g(u)`                                  | branching ratio |
//! |---------------|-----------------------------------------|-----------------|
//! | `exponential` | `alpha * exp(-beta * u)`, `u > 0`       | `alpha / beta`  |
//! | `powerlaw`    | `alpha * beta * (1 + beta*u)^-(1 + c)`  | `alpha / c`     |
//! | `rectangular` | `n / (b - a)` on `[a, b]`               | `n`             |
//!
//! The rectangular kernel's onset and offset lags are called `a` and `b`
//! here. Some texts write them as alpha and beta, which would collide with
//! the exponential symbols. `g(0)` is zero for the two decaying families.
//!
//! JSON form (externally tagged by `type`):
//!
//! ```json
//! {"type": "exponential", "alpha": 0.9, "beta": 2.0}
//! {"type": "powerlaw", "alpha": 0.3, "beta": 2.0, "c": 0.6}
//! {"type": "rectangular", "n": 0.5, "a": 0.1, "b": 0.6}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Exponential { alpha: f64, beta: f64 },
    #[serde(rename = "powerlaw")]
    PowerLaw { alpha: f64, beta: f64, c: f64 },
    Rectangular { n: f64, a: f64, b: f64 },
}

/// Which kernel variant a model or estimator works with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    #[default]
    Exponential,
    #[serde(rename = "powerlaw")]
    PowerLaw,
    Rectangular,
}

impl KernelFamily {
    /// Names of the kernel parameters, in the order used by [`Kernel::values`].
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            KernelFamily::Exponential => &["alpha", "beta"],
            KernelFamily::PowerLaw => &["alpha", "beta", "c"],
            KernelFamily::Rectangular => &["n", "a", "b"],
        }
    }

    pub fn arity(self) -> usize {
        self.param_names().len()
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelFamily::Exponential => "exponential",
            KernelFamily::PowerLaw => "powerlaw",
            KernelFamily::Rectangular => "rectangular",
        })
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = HawkesError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(KernelFamily::Exponential),
            "powerlaw" | "power-law" => Ok(KernelFamily::PowerLaw),
            "rectangular" | "rect" => Ok(KernelFamily::Rectangular),
            other => Err(HawkesError::Config(format!("unknown kernel family `{other}`"))),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(HawkesError::InvalidParams(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl Kernel {
    pub fn exponential(alpha: f64, beta: f64) -> Result<Self> {
        let k = Kernel::Exponential { alpha, beta };
        k.validate()?;
        Ok(k)
    }

    pub fn power_law(alpha: f64, beta: f64, c: f64) -> Result<Self> {
        let k = Kernel::PowerLaw { alpha, beta, c };
        k.validate()?;
        Ok(k)
    }

    pub fn rectangular(n: f64, a: f64, b: f64) -> Result<Self> {
        let k = Kernel::Rectangular { n, a, b };
        k.validate()?;
        Ok(k)
    }

    /// Checks the per-family parameter invariants (not stationarity).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Exponential { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)
            }
            Kernel::PowerLaw { alpha, beta, c } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                positive("c", c)
            }
            Kernel::Rectangular { n, a, b } => {
                positive("n", n)?;
                if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
                    return Err(HawkesError::InvalidParams(format!(
                        "rectangular lags need 0 <= a < b, got a = {a}, b = {b}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            Kernel::Exponential { .. } => KernelFamily::Exponential,
            Kernel::PowerLaw { .. } => KernelFamily::PowerLaw,
            Kernel::Rectangular { .. } => KernelFamily::Rectangular,
        }
    }

    /// `g(u)`, the contribution of an event `u` time units in the past.
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Kernel::Exponential { alpha, beta } => {
                if u > 0.0 {
                    alpha * (-beta * u).exp()
                } else {
                    0.0
                }
            }
            Kernel::PowerLaw { alpha, beta, c } => {
                if u > 0.0 {
                    alpha * beta * (-(1.0 + c) * (beta * u).ln_1p()).exp()
                } else {
                    0.0
                }
            }
            Kernel::Rectangular { n, a, b } => {
                if u >= a && u <= b {
                    n / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// Cumulative mass `G(u) = ∫₀ᵘ g(s) ds`; zero for `u <= 0`.
    pub fn integral(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match *self {
            Kernel::Exponential { alpha, beta } => -(alpha / beta) * (-beta * u).exp_m1(),
            Kernel::PowerLaw { alpha, beta, c } => {
                -(alpha / c) * (-c * (beta * u).ln_1p()).exp_m1()
            }
            Kernel::Rectangular { n, a, b } => n * ((u - a) / (b - a)).clamp(0.0, 1.0),
        }
    }

    /// Total mass of the kernel: the expected number of direct offspring.
    pub fn branching_ratio(&self) -> f64 {
        match *self {
            Kernel::Exponential { alpha, beta } => alpha / beta,
            Kernel::PowerLaw { alpha, c, .. } => alpha / c,
            Kernel::Rectangular { n, .. } => n,
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.branching_ratio() < 1.0
    }

    /// Upper bound of `g` on the elapsed-time window `(u0, u1]`.
    ///
    /// For the decaying families this is the right limit `g(max(u0, 0)+)`.
    pub fn sup_on(&self, u0: f64, u1: f64) -> f64 {
        if u1 <= 0.0 && !matches!(self, Kernel::Rectangular { .. }) {
            return 0.0;
        }
        let start = u0.max(0.0);
        match *self {
            Kernel::Exponential { alpha, beta } => alpha * (-beta * start).exp(),
            Kernel::PowerLaw { alpha, beta, c } => {
                alpha * beta * (-(1.0 + c) * (beta * start).ln_1p()).exp()
            }
            Kernel::Rectangular { n, a, b } => {
                if u0 <= b && u1 >= a {
                    n / (b - a)
                } else {
                    0.0
                }
            }
        }
    }

    /// Points in elapsed time where `g` is discontinuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Kernel::Rectangular { a, b, .. } => vec![a, b],
            _ => vec![0.0],
        }
    }

    /// Kernel parameters in [`KernelFamily::param_names`] order.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Kernel::Exponential { alpha, beta } => vec![alpha, beta],
            Kernel::PowerLaw { alpha, beta, c } => vec![alpha, beta, c],
            Kernel::Rectangular { n, a, b } => vec![n, a, b],
        }
    }

    /// Inverse of [`Kernel::values`]. No validation is applied.
    pub fn from_values(family: KernelFamily, v: &[f64]) -> Result<Self> {
        if v.len() != family.arity() {
            return Err(HawkesError::InvalidParams(format!(
                "{family} kernel takes {} values, got {}",
                family.arity(),
                v.len()
            )));
        }
        Ok(match family {
            KernelFamily::Exponential => Kernel::Exponential { alpha: v[0], beta: v[1] },
            KernelFamily::PowerLaw => Kernel::PowerLaw { alpha: v[0], beta: v[1], c: v[2] },
            KernelFamily::Rectangular => Kernel::Rectangular { n: v[0], a: v[1], b: v[2] },
        })
    }
}

/// Background rate plus excitation kernel.
///
/// A plain container: estimators that must report infeasible values (the
/// INAR route can return negative or explosive estimates) store them here
/// unchanged. Use [`HawkesParams::validate`] or
/// [`HawkesParams::validate_stationary`] where the invariants matter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HawkesParams {
    pub nu: f64,
    pub kernel: Kernel,
}

impl HawkesParams {
    pub fn new(nu: f64, kernel: Kernel) -> Result<Self> {
        let p = HawkesParams { nu, kernel };
        p.validate()?;
        Ok(p)
    }

    pub fn exponential(nu: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(nu, Kernel::exponential(alpha, beta)?)
    }

    pub fn validate(&self) -> Result<()> {
        positive("nu", self.nu)?;
        self.kernel.validate()
    }

    pub fn validate_stationary(&self) -> Result<()> {
        self.validate()?;
        let gamma = self.kernel.branching_ratio();
        if gamma < 1.0 {
            Ok(())
        } else {
            Err(HawkesError::InvalidParams(format!(
                "branching ratio {gamma} is not below 1"
            )))
        }
    }

    pub fn branching_ratio(&self) -> f64 {
        self.kernel.branching_ratio()
    }

    pub fn family(&self) -> KernelFamily {
        self.kernel.family()
    }

    /// Long-run event rate `nu / (1 - gamma)` of a stationary process.
    pub fn stationary_rate(&self) -> f64 {
        self.nu / (1.0 - self.branching_ratio())
    }

    /// `[nu, kernel params...]`, the vector estimators compare and iterate on.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.nu];
        v.extend(self.kernel.values());
        v
    }

    pub fn param_names(family: KernelFamily) -> Vec<&'static str> {
        let mut names = vec!["nu"];
        names.extend_from_slice(family.param_names());
        names
    }

    pub fn from_values(family: KernelFamily, v: &[f64]) -> Result<Self> {
        let (nu, rest) = v
            .split_first()
            .ok_or_else(|| HawkesError::InvalidParams("empty parameter vector".into()))?;
        Ok(HawkesParams { nu: *nu, kernel: Kernel::from_values(family, rest)? })
    }
}
