//! Plain SVG boxplots and bias-versus-bin-width lines.
//!
//! Output depends only on the summary, so identical summaries give
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HawkesError, Result};

use super::{Method, Summary, SummaryRow};

const PALETTE: [&str; 4] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a"];
const PLOT_H: f64 = 300.0;
const TOP: f64 = 40.0;
const LEFT: f64 = 70.0;

fn color(summary: &Summary, m: Method) -> &'static str {
    let idx = summary.methods().iter().position(|x| *x == m).unwrap_or(0);
    PALETTE[idx % PALETTE.len()]
}

/// Maps data values to the vertical pixel axis.
struct Axis {
    lo: f64,
    hi: f64,
    /// Linear tick spacing; unused on log axes.
    step: f64,
    log: bool,
}

/// 1, 2 or 5 times a power of ten, giving about four intervals over `range`.
fn nice_step(range: f64) -> f64 {
    let raw = range / 4.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

impl Axis {
    /// `from_zero` pins the lower end at 0 for nonnegative data.
    fn new(values: impl Iterator<Item = f64>, log: bool, from_zero: bool) -> Self {
        let vals: Vec<f64> = values.filter(|v| v.is_finite() && (!log || *v > 0.0)).collect();
        let (mut lo, mut hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if vals.is_empty() {
            (lo, hi) = if log { (0.1, 10.0) } else { (0.0, 1.0) };
        }
        if log {
            let (l, h) = (lo.log10().floor(), hi.log10().ceil());
            return Axis { lo: l, hi: if h > l { h } else { l + 1.0 }, step: 1.0, log };
        }
        if from_zero && lo >= 0.0 {
            lo = 0.0;
        }
        if hi <= lo {
            let pad = 0.5 * lo.abs().max(1.0);
            (lo, hi) = (lo - pad, hi + pad);
        }
        let step = nice_step(hi - lo);
        Axis { lo: (lo / step).floor() * step, hi: (hi / step).ceil() * step, step, log }
    }

    fn y(&self, v: f64) -> f64 {
        let v = if self.log { v.max(10f64.powf(self.lo)).log10() } else { v };
        TOP + PLOT_H * (1.0 - (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            return (self.lo as i32..=self.hi as i32).map(|e| (10f64.powi(e), format!("1e{e}"))).collect();
        }
        let n = ((self.hi - self.lo) / self.step).round() as i64;
        let decimals = (-self.step.log10().floor()).max(0.0) as usize;
        (0..=n)
            .map(|i| {
                let v = self.lo + self.step * i as f64;
                (v, format_value(v, decimals))
            })
            .collect()
    }
}

fn format_value(v: f64, decimals: usize) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        format!("{v:.decimals$}")
    }
}

fn delta_label(d: Option<f64>) -> String {
    d.map_or_else(|| "latent".to_string(), |d| format!("Δ={d}"))
}

fn svg_open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, width / 2.0);
}

fn draw_axis(out: &mut String, axis: &Axis, x0: f64, x1: f64) {
    let _ = writeln!(out, r#"<line x1="{x0:.1}" y1="{TOP:.1}" x2="{x0:.1}" y2="{:.1}" stroke="black"/>"#, TOP + PLOT_H);
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.1}" y1="{:.1}" x2="{x1:.1}" y2="{:.1}" stroke="black"/>"#,
        TOP + PLOT_H,
        TOP + PLOT_H
    );
    for (v, label) in axis.ticks() {
        let y = axis.y(v);
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{y:.2}" x2="{x0:.1}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 6.0, y + 4.0);
    }
}

/// Boxplot of one parameter's estimates, one box per (method, bin width).
pub fn render_boxplot(summary: &Summary, parameter: &str, log: bool) -> Result<String> {
    let rows: Vec<&SummaryRow> =
        summary.rows.iter().filter(|r| r.parameter == parameter && r.stats.is_some()).collect();
    if rows.is_empty() {
        return Err(HawkesError::EmptySummary);
    }
    let stats = |r: &SummaryRow| r.stats.clone().unwrap();
    let truth = stats(rows[0]).mean - stats(rows[0]).mean_bias;
    let axis = Axis::new(
        rows.iter()
            .flat_map(|r| {
                let s = stats(r);
                let mut v = vec![s.whisker_low, s.whisker_high, s.q1, s.q3];
                v.extend(s.outliers);
                v
            })
            .chain(std::iter::once(truth)),
        log,
        false,
    );
    let slot = 100.0;
    let width = LEFT + slot * rows.len() as f64 + 30.0;
    let height = TOP + PLOT_H + 70.0;
    let mut out = String::new();
    let scale = if log { " (log scale)" } else { "" };
    svg_open(&mut out, width, height, &format!("{parameter}{scale}"));
    draw_axis(&mut out, &axis, LEFT, width - 20.0);
    let ty = axis.y(truth);
    let _ = writeln!(
        out,
        r#"<line x1="{LEFT:.1}" y1="{ty:.2}" x2="{:.1}" y2="{ty:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        width - 20.0
    );
    for (i, r) in rows.iter().enumerate() {
        let s = stats(r);
        let cx = LEFT + slot * (i as f64 + 0.5);
        let c = color(summary, r.method);
        let (y1, y3, ym) = (axis.y(s.q1), axis.y(s.q3), axis.y(s.median));
        let (wl, wh) = (axis.y(s.whisker_low), axis.y(s.whisker_high));
        let _ = writeln!(out, r#"<g stroke="{c}" fill="none">"#);
        let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{wh:.2}" x2="{cx:.1}" y2="{y3:.2}"/>"#);
        let _ = writeln!(out, r#"<line x1="{cx:.1}" y1="{y1:.2}" x2="{cx:.1}" y2="{wl:.2}"/>"#);
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{y3:.2}" width="36.0" height="{:.2}"/>"#,
            cx - 18.0,
            (y1 - y3).max(0.5)
        );
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{ym:.2}" x2="{:.1}" y2="{ym:.2}" stroke-width="2"/>"#, cx - 18.0, cx + 18.0);
        for o in &s.outliers {
            let _ = writeln!(out, r#"<circle cx="{cx:.1}" cy="{:.2}" r="2.5"/>"#, axis.y(*o));
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + PLOT_H + 16.0,
            r.method
        );
        let _ = writeln!(
            out,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + PLOT_H + 30.0,
            delta_label(r.delta)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Mean absolute bias against bin width, one panel per parameter.
pub fn render_bias_vs_delta(summary: &Summary, log: bool) -> Result<String> {
    if summary.rows.iter().all(|r| r.stats.is_none()) {
        return Err(HawkesError::EmptySummary);
    }
    let deltas = summary.deltas();
    let methods = summary.methods();
    let panel_w = 130.0 + 50.0 * deltas.len().max(1) as f64;
    let width = LEFT + panel_w * summary.parameters.len() as f64 + 130.0;
    let height = TOP + PLOT_H + 60.0;
    let mut out = String::new();
    let scale = if log { " (log scale)" } else { "" };
    svg_open(&mut out, width, height, &format!("mean |bias| by bin width{scale}"));
    let bias_of = |r: &SummaryRow| r.stats.as_ref().map(|s| s.mean_abs_bias);
    for (p, param) in summary.parameters.iter().enumerate() {
        let x0 = LEFT + panel_w * p as f64;
        let x1 = x0 + panel_w - 80.0;
        let rows: Vec<&SummaryRow> = summary.rows.iter().filter(|r| &r.parameter == param).collect();
        let axis = Axis::new(rows.iter().filter_map(|r| bias_of(r)), log, true);
        draw_axis(&mut out, &axis, x0, x1);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{param}</text>"#, (x0 + x1) / 2.0, TOP - 6.0);
        let xs: Vec<f64> = (0..deltas.len())
            .map(|i| x0 + 25.0 + (x1 - x0 - 50.0) * if deltas.len() > 1 { i as f64 / (deltas.len() - 1) as f64 } else { 0.5 })
            .collect();
        for (x, d) in xs.iter().zip(&deltas) {
            let _ = writeln!(
                out,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{d}</text>"#,
                TOP + PLOT_H + 16.0
            );
        }
        for &m in &methods {
            let c = color(summary, m);
            if let Some(b) = rows.iter().find(|r| r.method == m && r.delta.is_none()).and_then(|r| bias_of(r)) {
                let y = axis.y(b);
                let _ = writeln!(
                    out,
                    r#"<line x1="{x0:.1}" y1="{y:.2}" x2="{x1:.1}" y2="{y:.2}" stroke="{c}" stroke-dasharray="4 3"/>"#
                );
                continue;
            }
            let pts: Vec<(f64, f64)> = deltas
                .iter()
                .zip(&xs)
                .filter_map(|(d, x)| {
                    rows.iter().find(|r| r.method == m && r.delta == Some(*d)).and_then(|r| bias_of(r)).map(|b| (*x, axis.y(b)))
                })
                .collect();
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.2}")).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}"/>"#, path.join(" "));
            for (x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{x:.1}" cy="{y:.2}" r="3" fill="{c}"/>"#);
            }
        }
    }
    let lx = width - 120.0;
    for (i, &m) in methods.iter().enumerate() {
        let y = TOP + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"#,
            y,
            color(summary, m)
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{m}</text>"#, lx + 14.0, y + 9.0);
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">bin width</text>"#,
        LEFT + panel_w * summary.parameters.len() as f64 / 2.0,
        TOP + PLOT_H + 40.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}

/// Whether some parameter's mean |bias| differs by more than 10x across
/// methods at one bin width.
pub fn needs_log_scale(summary: &Summary) -> bool {
    let mut keys: Vec<(Option<f64>, &str)> = summary.rows.iter().map(|r| (r.delta, r.parameter.as_str())).collect();
    keys.dedup();
    keys.iter().any(|(d, p)| {
        let b: Vec<f64> = summary
            .rows
            .iter()
            .filter(|r| r.delta == *d && r.parameter == *p)
            .filter_map(|r| r.stats.as_ref().map(|s| s.mean_abs_bias))
            .collect();
        let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = b.iter().copied().fold(0.0, f64::max);
        b.len() > 1 && (lo == 0.0 && hi > 0.0 || hi / lo > 10.0)
    })
}

/// Writes `boxplot_<param>.svg` for every parameter and `bias_vs_delta.svg`,
/// plus `_log` variants when [`needs_log_scale`] holds. Returns the paths.
pub fn emit_plots(summary: &Summary, dir: &Path) -> Result<Vec<PathBuf>> {
    if summary.rows.iter().all(|r| r.stats.is_none()) {
        return Err(HawkesError::EmptySummary);
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    let scales: &[bool] = if needs_log_scale(summary) { &[false, true] } else { &[false] };
    for &log in scales {
        let suffix = if log { "_log" } else { "" };
        for p in &summary.parameters {
            if summary.rows.iter().any(|r| &r.parameter == p && r.stats.is_some()) {
                put(format!("boxplot_{p}{suffix}.svg"), render_boxplot(summary, p, log)?)?;
            }
        }
        put(format!("bias_vs_delta{suffix}.svg"), render_bias_vs_delta(summary, log)?)?;
    }
    Ok(written)
}
