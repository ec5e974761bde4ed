//! Minimal standalone SVG scatter plots of objective-space fronts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sapgm_core::FrontPoint;

use crate::error::{BenchError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

/// Red for the accelerated solver and blue for the baseline; anything else
/// cycles through a few neutral colours.
fn colour(solver: &str, i: usize) -> &'static str {
    match solver {
        "sapgm" => "#d62728",
        "baseline" => "#1f77b4",
        _ => ["#2ca02c", "#9467bd", "#8c564b", "#7f7f7f"][i % 4],
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Value range with some padding; degenerate ranges get a unit window.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    let span = hi - lo;
    if span <= 1e-12 * f64::max(1.0, lo.abs()) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.into()
        }
    }
}

/// Renders the fronts (solver name → points) as an SVG document.
///
/// Points need two or three objectives; a third is dropped with a note.
pub fn render_svg_scatter(
    title: &str,
    fronts: &BTreeMap<String, Vec<FrontPoint>>,
) -> Result<String> {
    let dims: Vec<usize> = fronts.values().flatten().map(|p| p.f.len()).collect();
    if let Some(&m) = dims
        .iter()
        .find(|&&m| m != dims[0] || !(2..=3).contains(&m))
    {
        return Err(BenchError::Config(format!(
            "cannot plot {m}-objective points"
        )));
    }
    let m = dims.first().copied().unwrap_or(2);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text class="title" x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (LEFT, TOP, WIDTH - RIGHT, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect class="axes" x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );

    if dims.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text class="nodata" x="{}" y="{}" text-anchor="middle">no data</text>"#,
            (x0 + x1) / 2.0,
            (y0 + y1) / 2.0
        );
    } else {
        let (fx_lo, fx_hi) = range(fronts.values().flatten().map(|p| p.f[0]));
        let (fy_lo, fy_hi) = range(fronts.values().flatten().map(|p| p.f[1]));
        let sx = |v: f64| x0 + (v - fx_lo) / (fx_hi - fx_lo) * (x1 - x0);
        let sy = |v: f64| y1 - (v - fy_lo) / (fy_hi - fy_lo) * (y1 - y0);

        for i in 0..TICKS {
            let frac = i as f64 / (TICKS - 1) as f64;
            let vx = fx_lo + frac * (fx_hi - fx_lo);
            let vy = fy_lo + frac * (fy_hi - fy_lo);
            let (px, py) = (sx(vx), sy(vy));
            let _ = writeln!(
                svg,
                r#"<line class="tick" x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{}" stroke="black"/>"#,
                y1 + 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text class="tick-label" x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
                y1 + 18.0,
                tick_label(vx)
            );
            let _ = writeln!(
                svg,
                r#"<line class="tick" x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text class="tick-label" x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                py + 4.0,
                tick_label(vy)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text class="axis-label" x="{}" y="{}" text-anchor="middle">F1</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text class="axis-label" x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">F2</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );
        if m == 3 {
            let _ = writeln!(
                svg,
                r#"<text class="note" x="{x0}" y="{}">projection onto (F1, F2); F3 not shown</text>"#,
                TOP - 4.0
            );
        }
        for (i, (solver, points)) in fronts.iter().enumerate() {
            let c = colour(solver, i);
            for p in points {
                let _ = writeln!(
                    svg,
                    r#"<circle class="marker" data-solver="{}" cx="{:.3}" cy="{:.3}" r="3" fill="{c}" fill-opacity="0.7"/>"#,
                    escape(solver),
                    sx(p.f[0]),
                    sy(p.f[1])
                );
            }
        }
    }

    for (i, solver) in fronts.keys().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><rect x="{x}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}">{}</text></g>"#,
            y - 9.0,
            colour(solver, i),
            x + 16.0,
            y,
            escape(solver)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes [`render_svg_scatter`] to `path`.
pub fn emit_svg_scatter(
    title: &str,
    fronts: &BTreeMap<String, Vec<FrontPoint>>,
    path: &Path,
) -> Result<()> {
    let svg = render_svg_scatter(title, fronts)?;
    std::fs::write(path, svg).map_err(|e| BenchError::io(path, e))
}
