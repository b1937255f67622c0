//! F_N-versus-azimuth line plots as standalone SVG, with the plotted data as CSV.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::series::{write_atomic, ForceSeries, Quantity};
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 200.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// One plotted curve: blade 0 of the final revolution.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotCurve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn plot_curves(series: &[ForceSeries], quantity: Quantity) -> Result<Vec<PlotCurve>> {
    if series.is_empty() {
        return Err(Error::Argument("nothing to plot".into()));
    }
    series
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let rev = s
                .last_revolution()
                .ok_or_else(|| Error::Argument(format!("series {} (`{}`) has no samples", k + 1, s.metadata.label())))?;
            let points = s.curve(rev, 0, quantity);
            if points.is_empty() {
                return Err(Error::Argument(format!("series {} has no blade-0 samples", k + 1)));
            }
            Ok(PlotCurve { label: s.metadata.label(), points })
        })
        .collect()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round step for about `target` ticks over `span`.
fn nice_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

pub fn render_svg(curves: &[PlotCurve], quantity: Quantity) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        for &(_, f) in &c.points {
            lo = lo.min(f);
            hi = hi.max(f);
        }
    }
    if lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let step = nice_step(hi - lo, 6.0);
    let (lo, hi) = ((lo / step).floor() * step, (hi / step).ceil() * step);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |az: f64| MARGIN_LEFT + az / 360.0 * plot_w;
    let sy = |f: f64| MARGIN_TOP + (hi - f) / (hi - lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for k in 0..=6 {
        let az = 60.0 * k as f64;
        let x = sx(az);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{az:.0}</text>"##,
            MARGIN_TOP,
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 18.0
        );
    }
    let ticks = ((hi - lo) / step).round() as usize;
    for k in 0..=ticks {
        let f = lo + step * k as f64;
        let y = sy(f);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT + plot_w,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            format_tick(f, step)
        );
    }
    let unit = match quantity {
        Quantity::PerSpan => "F_N per span [N/m]",
        Quantity::Total => "F_N [N]",
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">azimuth [deg]</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{unit}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );
    for (k, c) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = c.points.iter().map(|&(az, f)| format!("{:.2},{:.2}", sx(az), sy(f))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_TOP + 20.0 + 20.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text class="legend" x="{}" y="{}">{}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&c.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(f: f64, step: f64) -> String {
    let decimals = if step >= 1.0 { 0 } else { (-step.log10()).ceil() as usize };
    format!("{f:.decimals$}")
}

/// Long-format data behind a plot: `series,label,azimuth_deg,value`.
pub fn plot_data_csv(curves: &[PlotCurve]) -> String {
    let mut out = String::from("series,label,azimuth_deg,value\n");
    for (k, c) in curves.iter().enumerate() {
        let label = c.label.replace([',', '\n'], " ");
        for &(az, f) in &c.points {
            let _ = writeln!(out, "{k},{label},{az:.14e},{f:.14e}");
        }
    }
    out
}

/// Write `path` (SVG) and a CSV of the plotted data next to it; returns the CSV path.
pub fn emit_plot(series: &[ForceSeries], path: impl AsRef<Path>, quantity: Quantity) -> Result<PathBuf> {
    let path = path.as_ref();
    let curves = plot_curves(series, quantity)?;
    write_atomic(path, render_svg(&curves, quantity).as_bytes())?;
    let data = path.with_extension("csv");
    write_atomic(&data, plot_data_csv(&curves).as_bytes())?;
    Ok(data)
}
