//! Run directories and artifact writers (JSON, CSV, SVG).

use crate::error::Result;
use crate::suites::{Plot, Table};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// `base/<command>-<UTC timestamp>`, with a numeric suffix on collision.
pub fn create_run_dir(base: &Path, command: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(base)?;
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string();
    let mut dir = base.join(format!("{command}-{stamp}"));
    let mut n = 1;
    while dir.exists() {
        dir = base.join(format!("{command}-{stamp}-{n}"));
        n += 1;
    }
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal line chart; non-positive values are dropped on logarithmic axes.
pub fn render_svg(plot: &Plot) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let tx = |v: f64| if plot.log_x { v.log10() } else { v };
    let ty = |v: f64| if plot.log_y { v.log10() } else { v };
    let ok = |(x, y): &(f64, f64)| {
        x.is_finite() && y.is_finite() && (!plot.log_x || *x > 0.0) && (!plot.log_y || *y > 0.0)
    };
    let pts: Vec<(f64, f64)> = plot.series.iter().flat_map(|s| s.1.iter().filter(|p| ok(p)).map(|&(x, y)| (tx(x), ty(y)))).collect();
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, escape(&plot.title));
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let _ = writeln!(out, r#"<rect x="{m}" y="{m}" width="{}" height="{}" fill="none" stroke="black"/>"#, w - 2.0 * m, h - 2.0 * m);
    let label = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
    let _ = writeln!(out, r#"<text x="{m}" y="{}" text-anchor="middle">{}</text>"#, h - m + 16.0, label(x0, plot.log_x));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w - m, h - m + 16.0, label(x1, plot.log_x));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, m - 4.0, h - m, label(y0, plot.log_y));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, m - 4.0, m + 4.0, label(y1, plot.log_y));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, w / 2.0, h - 16.0, escape(&plot.x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        h / 2.0,
        h / 2.0,
        escape(&plot.y_label)
    );
    for (j, (name, data)) in plot.series.iter().enumerate() {
        let color = PALETTE[j % PALETTE.len()];
        let coords: Vec<String> = data
            .iter()
            .filter(|p| ok(p))
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(tx(x)), sy(ty(y))))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{color}">{}</text>"#, w - m + 4.0 - 120.0, m + 16.0 * (j as f64 + 1.0), escape(name));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_svg(dir: &Path, plot: &Plot) -> Result<PathBuf> {
    let path = dir.join(format!("{}.svg", plot.name));
    std::fs::write(&path, render_svg(plot))?;
    Ok(path)
}
