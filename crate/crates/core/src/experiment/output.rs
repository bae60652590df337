use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::AggregateCurve;
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    t: usize,
    metric: String,
    mean: f64,
    stderr: f64,
    agent: String,
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent().filter(|d| !d.as_os_str().is_empty()) {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        None => Ok(()),
    }
}

/// Writes curves as long-format CSV with header `t,metric,mean,stderr,agent`.
pub fn emit_csv(curves: &[AggregateCurve], path: &Path) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["t", "metric", "mean", "stderr", "agent"])?;
    for c in curves {
        for i in 0..c.len() {
            w.serialize(Row {
                t: c.t[i],
                metric: c.metric.clone(),
                mean: c.mean[i],
                stderr: c.stderr[i],
                agent: c.agent.clone(),
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`emit_csv`], grouping rows by `(agent, metric)`
/// in order of first appearance.
pub fn read_csv(path: &Path) -> Result<Vec<AggregateCurve>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut curves: Vec<AggregateCurve> = Vec::new();
    for row in r.deserialize::<Row>() {
        let row = row?;
        let i = match curves.iter().position(|c| c.agent == row.agent && c.metric == row.metric) {
            Some(i) => i,
            None => {
                curves.push(AggregateCurve {
                    agent: row.agent.clone(),
                    metric: row.metric.clone(),
                    t: Vec::new(),
                    mean: Vec::new(),
                    stderr: Vec::new(),
                });
                curves.len() - 1
            }
        };
        curves[i].t.push(row.t);
        curves[i].mean.push(row.mean);
        curves[i].stderr.push(row.stderr);
    }
    Ok(curves)
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders one SVG panel per metric, one line per agent, with a shaded
/// ±1 standard-error band.
pub fn render_svg(curves: &[AggregateCurve], title: &str) -> String {
    let mut metrics: Vec<&str> = Vec::new();
    let mut agents: Vec<&str> = Vec::new();
    for c in curves {
        if !metrics.contains(&c.metric.as_str()) {
            metrics.push(&c.metric);
        }
        if !agents.contains(&c.agent.as_str()) {
            agents.push(&c.agent);
        }
    }
    let (width, panel_h, left, top) = (720.0, 260.0, 70.0, 40.0);
    let plot_w = width - left - 160.0;
    let plot_h = panel_h - 60.0;
    let height = top + panel_h * metrics.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#, width / 2.0, escape(title));
    for (pi, metric) in metrics.iter().enumerate() {
        let y0 = top + panel_h * pi as f64;
        let panel: Vec<&AggregateCurve> = curves.iter().filter(|c| c.metric == *metric && !c.is_empty()).collect();
        let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in &panel {
            for i in 0..c.len() {
                tmin = tmin.min(c.t[i] as f64);
                tmax = tmax.max(c.t[i] as f64);
                if c.mean[i].is_finite() {
                    vmin = vmin.min(c.mean[i] - c.stderr[i]);
                    vmax = vmax.max(c.mean[i] + c.stderr[i]);
                }
            }
        }
        if !(tmax > tmin) {
            tmax = tmin + 1.0;
        }
        if !(vmax > vmin) {
            vmin -= 0.5;
            vmax += 0.5;
        }
        let x = |t: f64| left + (t - tmin) / (tmax - tmin) * plot_w;
        let y = |v: f64| y0 + plot_h - (v - vmin) / (vmax - vmin) * plot_h;
        let _ = writeln!(
            s,
            r##"<rect x="{left}" y="{y0}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            left + plot_w / 2.0,
            y0 + plot_h + 32.0,
            escape(metric)
        );
        for (label, v) in [(vmin, vmin), (vmax, vmax)] {
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, left - 6.0, y(v) + 4.0, label);
        }
        for t in [tmin, tmax] {
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, x(t), y0 + plot_h + 14.0, t);
        }
        for c in panel {
            let color = PALETTE[agents.iter().position(|a| *a == c.agent).unwrap_or(0) % PALETTE.len()];
            let pts: Vec<(f64, f64, f64)> = (0..c.len())
                .filter(|&i| c.mean[i].is_finite())
                .map(|i| (x(c.t[i] as f64), y(c.mean[i] + c.stderr[i]), y(c.mean[i] - c.stderr[i])))
                .collect();
            if pts.is_empty() {
                continue;
            }
            let band: Vec<String> = pts
                .iter()
                .map(|p| format!("{:.2},{:.2}", p.0, p.1))
                .chain(pts.iter().rev().map(|p| format!("{:.2},{:.2}", p.0, p.2)))
                .collect();
            let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, band.join(" "));
            let line: Vec<String> = (0..c.len())
                .filter(|&i| c.mean[i].is_finite())
                .map(|i| format!("{:.2},{:.2}", x(c.t[i] as f64), y(c.mean[i])))
                .collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        }
        for (ai, agent) in agents.iter().enumerate() {
            let color = PALETTE[ai % PALETTE.len()];
            let ly = y0 + 14.0 + 16.0 * ai as f64;
            let lx = left + plot_w + 14.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(agent));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes [`render_svg`] output to `path`.
pub fn emit_svg_plot(curves: &[AggregateCurve], path: &Path, title: &str) -> Result<()> {
    create_parent(path)?;
    fs::write(path, render_svg(curves, title)).map_err(|e| Error::io(path, e))
}

/// Writes any serializable summary as pretty JSON.
pub fn emit_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    create_parent(path)?;
    fs::write(path, serde_json::to_string_pretty(value)?).map_err(|e| Error::io(path, e))
}
