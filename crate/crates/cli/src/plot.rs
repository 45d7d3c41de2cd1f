//! Minimal SVG line plots of a link report: delay spread per receiver and
//! SINR per receiver × combiner, both against seat index.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;

use crate::report::{read_report, ReportRow};

pub const DELAY_SPREAD_SVG: &str = "delay_spread.svg";
pub const SINR_SVG: &str = "sinr.svg";

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// A named polyline; `None` values are left out.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(usize, Option<f64>)>,
}

/// Reads `reports` and writes both plots into `out`; returns their paths.
pub fn plot(reports: &Path, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let rows = read_report(reports)?;
    anyhow::ensure!(!rows.is_empty(), "{}: report has no rows", reports.display());
    let seats = seat_axis(&rows);
    let delay = render("Delay spread", "delay spread (ns)", &seats, &delay_series(&rows));
    let sinr = render("SINR", "SINR (dB)", &seats, &sinr_series(&rows));

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for (name, svg) in [(DELAY_SPREAD_SVG, delay), (SINR_SVG, sinr)] {
        let path = out.join(name);
        fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    Ok(written)
}

fn seat_axis(rows: &[ReportRow]) -> Vec<usize> {
    let mut seats: Vec<usize> = rows.iter().map(|r| r.seat).collect();
    seats.sort_unstable();
    seats.dedup();
    seats
}

/// One series per receiver; the delay spread repeats across combiner rows so
/// the first row per seat is used.
pub fn delay_series(rows: &[ReportRow]) -> Vec<Series> {
    let mut by: BTreeMap<&str, BTreeMap<usize, Option<f64>>> = BTreeMap::new();
    for r in rows {
        by.entry(&r.receiver)
            .or_default()
            .entry(r.seat)
            .or_insert(r.delay_spread_ns);
    }
    by.into_iter()
        .map(|(name, pts)| Series {
            name: name.to_string(),
            points: pts.into_iter().collect(),
        })
        .collect()
}

/// One series per receiver × combiner pair.
pub fn sinr_series(rows: &[ReportRow]) -> Vec<Series> {
    let mut by: BTreeMap<(&str, &str), BTreeMap<usize, Option<f64>>> = BTreeMap::new();
    for r in rows {
        by.entry((&r.receiver, &r.combiner))
            .or_default()
            .insert(r.seat, Some(r.sinr_db));
    }
    by.into_iter()
        .map(|((rx, c), pts)| Series {
            name: format!("{rx}-{c}"),
            points: pts.into_iter().collect(),
        })
        .collect()
}

/// Renders line plots; non-finite values are pinned to the bottom edge and
/// marked as clipped.
pub fn render(title: &str, y_label: &str, seats: &[usize], series: &[Series]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter().filter_map(|p| p.1))
        .filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x_of = |seat: usize| {
        let i = seats.binary_search(&seat).unwrap_or(0);
        let span = (seats.len().max(2) - 1) as f64;
        MARGIN + plot_w * i as f64 / span
    };
    let y_of = |v: f64| HEIGHT - MARGIN - plot_h * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, "<title>{title}</title>");
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#888"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">seat</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for v in [lo, hi] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            y_of(v) + 4.0,
            tick(v)
        );
    }
    if let (Some(&first), Some(&last)) = (seats.first(), seats.last()) {
        for s in [first, last] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{s}</text>"#,
                x_of(s),
                HEIGHT - MARGIN + 16.0
            );
        }
    }

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            svg,
            r#"<g class="series" data-name="{}" stroke="{color}" fill="{color}">"#,
            s.name
        );
        let pts: Vec<(f64, f64, bool)> = s
            .points
            .iter()
            .filter_map(|&(seat, v)| v.map(|v| (seat, v)))
            .map(|(seat, v)| {
                let clipped = !v.is_finite();
                let y = if clipped { HEIGHT - MARGIN } else { y_of(v) };
                (x_of(seat), y, clipped)
            })
            .collect();
        let line: Vec<String> = pts.iter().map(|(x, y, _)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" points="{}"/>"#, line.join(" "));
        for (x, y, clipped) in &pts {
            let class = if *clipped { "point clipped" } else { "point" };
            let _ = writeln!(svg, r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
        }
        let ly = MARGIN + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 110.0;
        let _ = writeln!(
            svg,
            r#"<text class="legend" x="{lx}" y="{ly}" stroke="none">{}</text>"#,
            s.name
        );
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}
