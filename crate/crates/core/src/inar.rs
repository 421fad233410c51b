//! INAR(p) conditional-least-squares approximation.
//!
//! With bin counts `N_1..N_K` and lag `p`, regress `N_{k}` on the previous
//! `p` counts and an intercept. The coefficients, divided by the bin width,
//! estimate the kernel at the lag times and the background rate. An
//! exponential curve fitted to the kernel points gives `(alpha, beta)`.
//!
//! Nothing constrains the result to be stationary or even positive; such
//! estimates are returned as-is and flagged.

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::kernels::{HawkesParams, Kernel};
use crate::optimize::{minimize, NelderMeadOptions};
use crate::process::BinnedCounts;

/// Condition number above which the normal matrix is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
pub const MAX_DEFAULT_LAG: usize = 20;

/// Where the kernel estimate for lag `k` is placed in time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagAbscissae {
    /// `k * delta`
    #[default]
    End,
    /// `(k - 1/2) * delta`
    Midpoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InarConfig {
    /// Support `s` of the kernel; the lag is `ceil(s / delta)`. When unset,
    /// `p = min(20, floor(K / 5))`.
    #[serde(default)]
    pub support: Option<f64>,
    #[serde(default)]
    pub abscissae: LagAbscissae,
}

impl InarConfig {
    pub fn lag(&self, bins: usize, delta: f64) -> Result<usize> {
        match self.support {
            Some(s) => {
                if !(s > delta) {
                    return Err(HawkesError::Config(format!(
                        "INAR support {s} must exceed the bin width {delta}"
                    )));
                }
                Ok((s / delta - 1e-9).ceil() as usize)
            }
            None => Ok((bins / 5).clamp(1, MAX_DEFAULT_LAG)),
        }
    }
}

/// The unconstrained CLS output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InarRaw {
    pub g_points: Vec<f64>,
    pub nu_hat: f64,
    pub lag_times: Vec<f64>,
    pub bin_width: f64,
    /// 1-norm condition estimate of the normal matrix.
    pub condition: f64,
}

/// Design matrix rows (lag 1 first, intercept last) and regression target.
pub fn build_design(counts: &[u64], p: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let k = counts.len();
    if p == 0 || k <= p + 1 {
        return Err(HawkesError::TooFewBins { bins: k, lag: p });
    }
    let cols = k - p;
    let mut z = Vec::with_capacity(p + 1);
    for r in 1..=p {
        // N_{p+1-r} .. N_{K-r}, 1-based
        z.push(counts[p - r..k - r].iter().map(|&n| n as f64).collect());
    }
    z.push(vec![1.0; cols]);
    let y = counts[p..].iter().map(|&n| n as f64).collect();
    Ok((z, y))
}

/// LU factorization with partial pivoting of a square matrix.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<Vec<f64>>) -> Option<Lu> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
            if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
                return None;
            }
            a.swap(col, piv);
            perm.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                a[row][col] = f;
                for c in col + 1..n {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
        Some(Lu { lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i][j] * x[j];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }

    fn inverse_norm1(&self) -> f64 {
        let n = self.lu.len();
        let mut cols = vec![0.0; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols[j] = self.solve(&e).iter().map(|v| v.abs()).sum();
        }
        cols.into_iter().fold(0.0, f64::max)
    }
}

fn norm1(a: &[Vec<f64>]) -> f64 {
    (0..a.len()).map(|j| a.iter().map(|row| row[j].abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `ĝ = (1/Δ) Y Zᵀ (Z Zᵀ)⁻¹`; every coordinate, the intercept included, is
/// divided by `Δ`.
pub fn cls_estimate(counts: &BinnedCounts, cfg: &InarConfig) -> Result<InarRaw> {
    let delta = counts.spec().uniform_width().ok_or_else(|| {
        HawkesError::InvalidBins("the INAR estimator needs equal-width bins".into())
    })?;
    let p = cfg.lag(counts.len(), delta)?;
    let (z, y) = build_design(counts.counts(), p)?;
    let dim = p + 1;
    let mut gram = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v: f64 = z[i].iter().zip(&z[j]).map(|(a, b)| a * b).sum();
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    let rhs: Vec<f64> = z.iter().map(|row| row.iter().zip(&y).map(|(a, b)| a * b).sum()).collect();
    let gram_norm = norm1(&gram);
    let lu = Lu::factor(gram).ok_or(HawkesError::SingularDesign { condition: f64::INFINITY })?;
    let condition = gram_norm * lu.inverse_norm1();
    if !(condition <= SINGULAR_CONDITION) {
        return Err(HawkesError::SingularDesign { condition });
    }
    let coef = lu.solve(&rhs);
    let g_points = coef[..p].iter().map(|c| c / delta).collect();
    let nu_hat = coef[p] / delta;
    let lag_times = (1..=p)
        .map(|k| match cfg.abscissae {
            LagAbscissae::End => k as f64 * delta,
            LagAbscissae::Midpoint => (k as f64 - 0.5) * delta,
        })
        .collect();
    Ok(InarRaw { g_points, nu_hat, lag_times, bin_width: delta, condition })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    /// Possibly infeasible: `nu` may be negative, `alpha` zero, `alpha/beta >= 1`.
    pub params: HawkesParams,
    /// `alpha` collapsed to 0 or `beta` hit the search range edge.
    pub boundary: bool,
    pub stationary: bool,
    pub sse: f64,
}

/// Least-squares fit of `alpha * exp(-beta * tau_k)` to the kernel points.
///
/// `alpha` is profiled out in closed form (clamped at 0), leaving a
/// one-dimensional simplex search over `ln beta`. `beta` is confined to
/// `[1e-6, 700 / tau_1]` so the profiled `alpha` stays finite.
pub fn fit_exponential(raw: &InarRaw) -> Result<ExponentialFit> {
    let g = &raw.g_points;
    let tau = &raw.lag_times;
    if g.len() < 2 {
        return Err(HawkesError::FitFailure(format!("need at least 2 kernel points, got {}", g.len())));
    }
    let lo = (1e-6f64).ln();
    let hi = (700.0 / tau[0]).ln();
    let profile = |log_beta: f64| -> (f64, f64, f64) {
        let beta = log_beta.clamp(lo, hi).exp();
        // Scale by e^{β τ_1} so the leading term is exactly 1.
        let e: Vec<f64> = tau.iter().map(|t| (-beta * (t - tau[0])).exp()).collect();
        let ge: f64 = g.iter().zip(&e).map(|(a, b)| a * b).sum();
        let ee: f64 = e.iter().map(|b| b * b).sum();
        let scaled = (ge / ee).max(0.0);
        let sse = g.iter().zip(&e).map(|(a, b)| (a - scaled * b).powi(2)).sum();
        (sse, scaled * (beta * tau[0]).exp(), beta)
    };

    let grid = 141;
    let start = (0..grid)
        .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
        .min_by(|a, b| profile(*a).0.total_cmp(&profile(*b).0))
        .unwrap();
    let opts = NelderMeadOptions { tolerance: 1e-12, max_iters: 5000, initial_step: 0.05 };
    let m = minimize(|x| profile(x[0]).0, &[start], &opts);
    if !m.converged {
        return Err(HawkesError::FitFailure(format!("simplex did not converge in {} iterations", m.iters)));
    }
    let log_beta = m.x[0].clamp(lo, hi);
    let (sse, alpha, beta) = profile(log_beta);
    if !alpha.is_finite() {
        return Err(HawkesError::FitFailure("profiled alpha overflowed".into()));
    }
    let at_edge = (log_beta - lo).abs() < 1e-6 || (hi - log_beta).abs() < 1e-6;
    let params = HawkesParams { nu: raw.nu_hat, kernel: Kernel::Exponential { alpha, beta } };
    Ok(ExponentialFit {
        params,
        boundary: alpha == 0.0 || at_edge,
        stationary: params.validate_stationary().is_ok(),
        sse,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InarEstimate {
    pub raw: InarRaw,
    pub fit: ExponentialFit,
}

/// CLS followed by the exponential fit.
pub fn inar_fit(counts: &BinnedCounts, cfg: &InarConfig) -> Result<InarEstimate> {
    let raw = cls_estimate(counts, cfg)?;
    let fit = fit_exponential(&raw)?;
    Ok(InarEstimate { raw, fit })
}
