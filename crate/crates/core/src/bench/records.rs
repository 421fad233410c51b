use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};

use super::{RunRecord, Status};

/// JSON form of a record table: the parameter names plus the records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordSet {
    pub parameters: Vec<String>,
    pub records: Vec<RunRecord>,
}

const FIXED: [&str; 5] = ["method", "delta", "replicate", "status", "wall_time_s"];

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per record; `est_<param>` and `bias_<param>` columns follow the
/// fixed ones, and failed fits leave them empty.
pub fn records_to_csv(records: &[RunRecord], params: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = FIXED.iter().map(|s| s.to_string()).collect();
    header.extend(params.iter().map(|p| format!("est_{p}")));
    header.extend(params.iter().map(|p| format!("bias_{p}")));
    header.push("error".into());
    header.push("message".into());
    w.write_record(&header)?;
    for r in records {
        for (what, v) in [("estimates", &r.estimates), ("bias", &r.bias)] {
            if !v.is_empty() && v.len() != params.len() {
                return Err(HawkesError::Config(format!(
                    "record has {} {what} but {} parameter names were given",
                    v.len(),
                    params.len()
                )));
            }
        }
        let mut row = vec![
            r.method.to_string(),
            opt_cell(r.delta),
            r.replicate.to_string(),
            r.status.as_str().to_string(),
            r.wall_time_s.to_string(),
        ];
        for v in [&r.estimates, &r.bias] {
            row.extend((0..params.len()).map(|i| opt_cell(v.get(i).copied())));
        }
        row.push(r.error.clone().unwrap_or_default());
        row.push(r.message.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| HawkesError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn parse<T: std::str::FromStr>(cell: &str, column: &str) -> Result<T> {
    cell.parse().map_err(|_| HawkesError::Config(format!("bad value {cell:?} in column {column}")))
}

fn parse_opt(cell: &str, column: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse(cell, column).map(Some)
    }
}

/// Parses [`records_to_csv`] output; returns the records and parameter names.
pub fn records_from_csv(text: &str) -> Result<(Vec<RunRecord>, Vec<String>)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let n = header.len();
    if n < FIXED.len() + 2 || header[..FIXED.len()] != FIXED || header[n - 2..] != ["error", "message"] {
        return Err(HawkesError::Config("not a records CSV: unexpected header".into()));
    }
    let params: Vec<String> = header[FIXED.len()..n - 2]
        .iter()
        .filter_map(|h| h.strip_prefix("est_").map(String::from))
        .collect();
    let k = params.len();
    if n != FIXED.len() + 2 * k + 2 {
        return Err(HawkesError::Config("records CSV needs matching est_ and bias_ columns".into()));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let column = |i: usize| -> (&str, &str) { (&row[i], header[i].as_str()) };
        let collect = |from: usize| -> Result<Vec<f64>> {
            let vals = (from..from + k).map(|i| parse_opt(&row[i], &header[i])).collect::<Result<Vec<_>>>()?;
            if vals.iter().all(Option::is_none) {
                Ok(vec![])
            } else {
                vals.into_iter()
                    .map(|v| v.ok_or_else(|| HawkesError::Config("partially empty estimate row".into())))
                    .collect()
            }
        };
        let (m, mc) = column(0);
        let (d, dc) = column(1);
        let (rep, rc) = column(2);
        let (st, sc) = column(3);
        let (wt, wc) = column(4);
        let text = |i: usize| (!row[i].is_empty()).then(|| row[i].to_string());
        out.push(RunRecord {
            method: m.parse().map_err(|_| HawkesError::Config(format!("bad value {m:?} in column {mc}")))?,
            delta: parse_opt(d, dc)?,
            replicate: parse(rep, rc)?,
            status: st.parse::<Status>().map_err(|_| HawkesError::Config(format!("bad value {st:?} in column {sc}")))?,
            wall_time_s: parse(wt, wc)?,
            estimates: collect(FIXED.len())?,
            bias: collect(FIXED.len() + k)?,
            error: text(n - 2),
            message: text(n - 1),
        });
    }
    Ok((out, params))
}

pub fn write_records_csv(records: &[RunRecord], params: &[String], path: &Path) -> Result<()> {
    std::fs::write(path, records_to_csv(records, params)?)?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<(Vec<RunRecord>, Vec<String>)> {
    records_from_csv(&std::fs::read_to_string(path)?)
}
