use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};

use super::{Method, RunRecord, Status};

pub const QUANTILE_RULE: &str =
    "type-7 linear interpolation; whiskers reach the most extreme values within 1.5 IQR of the quartiles";

/// Type-7 quantile of ascending `sorted`: `x[h] + (h - ⌊h⌋)(x[⌊h⌋+1] - x[⌊h⌋])`
/// with `h = (n - 1)p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub mean_bias: f64,
    pub mean_abs_bias: f64,
}

impl BoxStats {
    /// `None` when `values` is empty.
    pub fn from_values(values: &[f64], biases: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile(&sorted, 0.25);
        let q3 = quantile(&sorted, 0.75);
        let iqr = q3 - q1;
        let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v)).collect();
        let n = values.len() as f64;
        Some(BoxStats {
            mean: values.iter().sum::<f64>() / n,
            median: quantile(&sorted, 0.5),
            q1,
            q3,
            whisker_low: inside.first().copied().unwrap_or(q1),
            whisker_high: inside.last().copied().unwrap_or(q3),
            outliers: sorted.iter().copied().filter(|v| !(lo_fence..=hi_fence).contains(v)).collect(),
            mean_bias: biases.iter().sum::<f64>() / n,
            mean_abs_bias: biases.iter().map(|b| b.abs()).sum::<f64>() / n,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub delta: Option<f64>,
    pub parameter: String,
    /// Records that produced an estimate.
    pub n: usize,
    pub stats: Option<BoxStats>,
    pub ok: usize,
    pub boundary: usize,
    pub nonconverged: usize,
    pub singular: usize,
    pub failed: usize,
    /// Occurrences of each error kind among the group's records.
    pub errors: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub quantile_rule: String,
    pub parameters: Vec<String>,
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn row(&self, method: Method, delta: Option<f64>, parameter: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method && r.delta == delta && r.parameter == parameter)
    }

    /// Methods in order of first appearance.
    pub fn methods(&self) -> Vec<Method> {
        let mut out: Vec<Method> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method);
            }
        }
        out
    }

    /// Distinct bin widths, ascending.
    pub fn deltas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.rows.iter().filter_map(|r| r.delta).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// One row per (method, bin width, parameter) in order of first appearance.
///
/// Records with an estimate enter the moments whatever their status; the
/// status counts are reported alongside.
pub fn summarize(records: &[RunRecord], params: &[String]) -> Result<Summary> {
    if records.is_empty() {
        return Err(HawkesError::EmptySummary);
    }
    let mut groups: Vec<(Method, Option<f64>)> = Vec::new();
    for r in records {
        if !groups.iter().any(|g| g.0 == r.method && g.1 == r.delta) {
            groups.push((r.method, r.delta));
        }
    }
    let mut rows = Vec::new();
    for (method, delta) in groups {
        let members: Vec<&RunRecord> = records.iter().filter(|r| r.method == method && r.delta == delta).collect();
        let count = |s: Status| members.iter().filter(|r| r.status == s).count();
        let mut errors = BTreeMap::new();
        for kind in members.iter().filter_map(|r| r.error.clone()) {
            *errors.entry(kind).or_insert(0) += 1;
        }
        let with_estimates: Vec<&&RunRecord> =
            members.iter().filter(|r| r.estimates.len() == params.len() && !r.status.is_failure()).collect();
        for (k, name) in params.iter().enumerate() {
            let values: Vec<f64> = with_estimates.iter().map(|r| r.estimates[k]).collect();
            let biases: Vec<f64> =
                with_estimates.iter().map(|r| r.bias.get(k).copied().unwrap_or(f64::NAN)).collect();
            rows.push(SummaryRow {
                method,
                delta,
                parameter: name.clone(),
                n: values.len(),
                stats: BoxStats::from_values(&values, &biases),
                ok: count(Status::Ok),
                boundary: count(Status::Boundary),
                nonconverged: count(Status::Nonconverged),
                singular: count(Status::Singular),
                failed: count(Status::Failed),
                errors: errors.clone(),
            });
        }
    }
    Ok(Summary { quantile_rule: QUANTILE_RULE.into(), parameters: params.to_vec(), rows })
}

/// CSV form of the summary; the quantile rule goes in a leading comment.
pub fn summary_to_csv(summary: &Summary) -> Result<String> {
    let mut out = format!("# quantiles: {}\n", summary.quantile_rule);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "method",
        "delta",
        "parameter",
        "n",
        "mean",
        "median",
        "q1",
        "q3",
        "whisker_low",
        "whisker_high",
        "outliers",
        "mean_bias",
        "mean_abs_bias",
        "ok",
        "boundary",
        "nonconverged",
        "singular",
        "failed",
        "errors",
    ])?;
    for r in &summary.rows {
        let mut row = vec![
            r.method.to_string(),
            r.delta.map(|d| d.to_string()).unwrap_or_default(),
            r.parameter.clone(),
            r.n.to_string(),
        ];
        match &r.stats {
            Some(s) => {
                row.extend([s.mean, s.median, s.q1, s.q3, s.whisker_low, s.whisker_high].map(|v| v.to_string()));
                row.push(s.outliers.iter().map(f64::to_string).collect::<Vec<_>>().join(";"));
                row.extend([s.mean_bias, s.mean_abs_bias].map(|v| v.to_string()));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 9)),
        }
        row.extend([r.ok, r.boundary, r.nonconverged, r.singular, r.failed].map(|v| v.to_string()));
        row.push(r.errors.iter().map(|(k, n)| format!("{k}={n}")).collect::<Vec<_>>().join(";"));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| HawkesError::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
    Ok(out)
}
