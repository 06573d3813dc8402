//! Static SVG line plots of series columns.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::series::SeriesTable;

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Columns to draw: one inner list per stacked panel, all against `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub x: String,
    pub panels: Vec<Vec<String>>,
    pub title: String,
}

impl PlotSpec {
    pub fn new(x: &str, panels: &[&[&str]], title: &str) -> Self {
        Self {
            x: x.to_string(),
            panels: panels.iter().map(|p| p.iter().map(|s| s.to_string()).collect()).collect(),
            title: title.to_string(),
        }
    }
}

fn plot_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Series(msg.into()))
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo <= 1e-300 * lo.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        (lo - pad, hi + pad)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(series: &SeriesTable, spec: &PlotSpec) -> Result<String> {
    if series.is_empty() {
        return plot_err("cannot plot an empty series");
    }
    if spec.panels.is_empty() || spec.panels.iter().any(|p| p.is_empty()) {
        return plot_err("plot spec needs at least one column per panel");
    }
    let x = series.column(&spec.x).ok_or_else(|| Error::Series(format!("no column {:?}", spec.x)))?;
    let panels = spec
        .panels
        .iter()
        .map(|cols| {
            cols.iter()
                .map(|c| series.column(c).map(|v| (c.as_str(), v)).ok_or_else(|| Error::Series(format!("no column {c:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let height = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&spec.title))
        .unwrap();

    let (x_lo, x_hi) = range(x.iter().copied());
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    for (p, cols) in panels.iter().enumerate() {
        let top = MARGIN_TOP + p as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
        let (y_lo, y_hi) = range(cols.iter().flat_map(|(_, v)| v.iter().copied()));
        let sx = |v: f64| MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
        let sy = |v: f64| top + PANEL_HEIGHT - (v - y_lo) / (y_hi - y_lo) * PANEL_HEIGHT;

        writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_w}" height="{PANEL_HEIGHT}" fill="none" stroke="black"/>"#
        )
        .unwrap();
        for k in 0..=4 {
            let fx = x_lo + (x_hi - x_lo) * k as f64 / 4.0;
            let fy = y_lo + (y_hi - y_lo) * k as f64 / 4.0;
            writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
                sx(fx),
                top + PANEL_HEIGHT + 15.0,
                fx
            )
            .unwrap();
            writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3e}</text>"#, MARGIN_LEFT - 4.0, sy(fy) + 4.0, fy)
                .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            top + PANEL_HEIGHT + 32.0,
            escape(&spec.x)
        )
        .unwrap();
        if y_lo < 0.0 && y_hi > 0.0 {
            writeln!(
                svg,
                r##"<line x1="{MARGIN_LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
                sy(0.0),
                MARGIN_LEFT + plot_w
            )
            .unwrap();
        }
        for (i, (name, values)) in cols.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let points: Vec<String> = x.iter().zip(values).map(|(&a, &b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
            writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "))
                .unwrap();
            writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                MARGIN_LEFT + 8.0,
                top + 16.0 + 14.0 * i as f64,
                escape(name)
            )
            .unwrap();
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
