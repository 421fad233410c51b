//! CSV and JSON input/output for event sequences and bin counts.
//!
//! Events CSV: a `# window_end=<T>` comment, a `time` header and one event
//! time per row. Counts CSV comes in two shapes:
//!
//! ```text
//! # bin_width=0.5            lower,upper,count
//! # origin=0                 0,0.5,3
//! count                      0.5,1.5,1
//! 3
//! 1
//! ```
//!
//! The single-column form describes a uniform grid; `bin_width` defaults to 1
//! and `origin` to 0 when absent.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HawkesError, Result};
use crate::process::{BinSpec, BinnedCounts, EventSequence};

/// `key=value` pairs from `#` comment lines, and the remaining text.
fn split_metadata(text: &str) -> (Vec<(String, String)>, String) {
    let mut meta = Vec::new();
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else if !trimmed.is_empty() {
            body.push_str(trimmed);
            body.push('\n');
        }
    }
    (meta, body)
}

fn meta_f64(meta: &[(String, String)], key: &str) -> Result<Option<f64>> {
    match meta.iter().find(|(k, _)| k == key) {
        None => Ok(None),
        Some((_, v)) => v
            .parse()
            .map(Some)
            .map_err(|_| HawkesError::InvalidBins(format!("cannot parse {key}={v}"))),
    }
}

fn parse_field<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| HawkesError::InvalidEvents(format!("cannot parse {what} {field:?}")))
}

pub fn read_events_csv<R: Read>(mut reader: R) -> Result<EventSequence> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let (meta, body) = split_metadata(&text);
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let mut times = Vec::new();
    for row in rdr.records() {
        times.push(parse_field::<f64>(&row?[0], "event time")?);
    }
    let end = match meta_f64(&meta, "window_end")? {
        Some(t) => t,
        None => times.last().copied().unwrap_or(0.0),
    };
    EventSequence::new(times, end)
}

pub fn write_events_csv<W: Write>(events: &EventSequence, mut writer: W) -> Result<()> {
    writeln!(writer, "# window_end={}", events.window_end())?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["time"])?;
    for t in events.times() {
        w.write_record([t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(mut reader: R) -> Result<BinnedCounts> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let (meta, body) = split_metadata(&text);
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_lowercase()).collect();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let count_col = col("count")
        .ok_or_else(|| HawkesError::InvalidBins("counts CSV needs a `count` column".into()))?;
    let parse_count = |s: &str| -> Result<u64> {
        s.trim().parse().map_err(|_| HawkesError::InvalidBins(format!("cannot parse count {s:?}")))
    };
    match (col("lower"), col("upper")) {
        (Some(lo), Some(hi)) => {
            let mut edges = Vec::new();
            let mut counts = Vec::new();
            for row in rdr.records() {
                let row = row?;
                let lower: f64 = parse_field(&row[lo], "bin edge")?;
                let upper: f64 = parse_field(&row[hi], "bin edge")?;
                match edges.last() {
                    None => edges.push(lower),
                    Some(&prev) if prev != lower => {
                        return Err(HawkesError::InvalidBins(format!(
                            "bins must be contiguous: {prev} then {lower}"
                        )))
                    }
                    _ => {}
                }
                edges.push(upper);
                counts.push(parse_count(&row[count_col])?);
            }
            BinnedCounts::new(BinSpec::new(edges)?, counts)
        }
        _ => {
            let width = meta_f64(&meta, "bin_width")?.unwrap_or(1.0);
            let origin = meta_f64(&meta, "origin")?.unwrap_or(0.0);
            let counts = rdr.records().map(|r| parse_count(&r?[count_col])).collect::<Result<Vec<_>>>()?;
            BinnedCounts::new(BinSpec::uniform(origin, width, counts.len())?, counts)
        }
    }
}

/// Writes the single-column form for uniform grids, else the three-column one.
pub fn write_counts_csv<W: Write>(counts: &BinnedCounts, mut writer: W) -> Result<()> {
    let spec = counts.spec();
    match spec.uniform_width() {
        Some(width) => {
            writeln!(writer, "# bin_width={width}")?;
            writeln!(writer, "# origin={}", spec.start())?;
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(["count"])?;
            for c in counts.counts() {
                w.write_record([c.to_string()])?;
            }
            w.flush()?;
        }
        None => {
            let mut w = csv::Writer::from_writer(writer);
            w.write_record(["lower", "upper", "count"])?;
            for (j, c) in counts.counts().iter().enumerate() {
                w.write_record([spec.lower(j).to_string(), spec.upper(j).to_string(), c.to_string()])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
