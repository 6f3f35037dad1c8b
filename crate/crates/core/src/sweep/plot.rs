//! Self-contained SVG line charts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::tables::{aggregate, TraceTable};
use super::RunRecord;
use crate::error::{Error, Result};
use crate::oracle::ACCURACY_FLOOR;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Debug)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Optional `(low, high)` whisker.
    pub range: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
    pub dashed: bool,
    pub color: usize,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: &'a [Series],
    /// Fixed x range; defaults to the data extent.
    pub x_range: Option<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() as i64;
    let end = (hi / step).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return None;
    }
    if hi - lo < 1e-12 {
        Some((lo - 0.5, hi + 0.5))
    } else {
        let pad = 0.05 * (hi - lo);
        Some((lo - pad, hi + pad))
    }
}

pub fn render(chart: &Chart<'_>) -> Result<String> {
    let xs = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.x));
    let (x0, x1) = match chart.x_range {
        Some(r) => r,
        None => extent(xs).ok_or_else(|| Error::InsufficientData("empty chart".into()))?,
    };
    let ys = chart.series.iter().flat_map(|s| {
        s.points.iter().flat_map(|p| {
            let (lo, hi) = p.range.unwrap_or((p.y, p.y));
            [p.y, lo, hi]
        })
    });
    let (y0, y1) = extent(ys).ok_or_else(|| Error::InsufficientData("empty chart".into()))?;
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        escape(chart.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 16.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(18,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        escape(chart.y_label)
    );

    for (k, series) in chart.series.iter().enumerate() {
        let color = PALETTE[series.color % PALETTE.len()];
        let dash = if series.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let path: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.y.is_finite())
            .map(|p| format!("{:.2},{:.2}", sx(p.x), sy(p.y)))
            .collect();
        if path.len() > 1 {
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                path.join(" ")
            );
        }
        for p in &series.points {
            if let Some((lo, hi)) = p.range {
                let x = sx(p.x);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"/><line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    sy(lo),
                    sy(hi),
                    x - 3.0,
                    sy(lo),
                    x + 3.0,
                    sy(lo),
                    x - 3.0,
                    sy(hi),
                    x + 3.0,
                    sy(hi)
                );
            }
            if !series.dashed && series.points.len() < 60 {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                    sx(p.x),
                    sy(p.y)
                );
            }
        }
        let ly = MARGIN_TOP + 14.0 + 18.0 * k as f64;
        let lx = MARGIN_LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Dissociation curves (mean with min/max whiskers, reference dashed) and the
/// matching accuracy chart for one case.
pub fn render_curves(case: u8, records: &[RunRecord]) -> Result<(String, String)> {
    let rows: Vec<_> = aggregate(records).into_iter().filter(|r| r.case == case).collect();
    let rs: BTreeSet<u64> = rows.iter().map(|r| r.r.to_bits()).collect();
    if rs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "case {case} needs at least two bond lengths"
        )));
    }
    let mut by_state: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for r in &rows {
        by_state.entry(r.state).or_default().push(r);
    }
    let mut energy = Vec::new();
    let mut acc = Vec::new();
    for (state, pts) in &by_state {
        let label = &pts[0].label;
        energy.push(Series {
            name: label.clone(),
            points: pts
                .iter()
                .map(|p| Point { x: p.r, y: p.energy_mean, range: Some((p.energy_min, p.energy_max)) })
                .collect(),
            dashed: false,
            color: *state,
        });
        energy.push(Series {
            name: format!("{label} (FCI)"),
            points: pts.iter().map(|p| Point { x: p.r, y: p.e_fci, range: None }).collect(),
            dashed: true,
            color: *state,
        });
        acc.push(Series {
            name: label.clone(),
            points: pts
                .iter()
                .map(|p| Point { x: p.r, y: p.accuracy_mean, range: Some((p.accuracy_min, p.accuracy_max)) })
                .collect(),
            dashed: false,
            color: *state,
        });
    }
    let molecule = rows[0].molecule;
    let curves = render(&Chart {
        title: &format!("{molecule} case ({case}): energy levels"),
        x_label: "bond length (Å)",
        y_label: "energy (Hartree)",
        series: &energy,
        x_range: None,
    })?;
    let accuracy = render(&Chart {
        title: &format!("{molecule} case ({case}): accuracy"),
        x_label: "bond length (Å)",
        y_label: "log10 |E - E_FCI|",
        series: &acc,
        x_range: None,
    })?;
    Ok((curves, accuracy))
}

/// `log10|E - E_FCI|` against update count for sample 0 of one trace table.
pub fn render_convergence(table: &TraceTable, records: &[RunRecord]) -> Result<String> {
    let rows: Vec<_> = table.rows.iter().filter(|r| r.sample == 0).collect();
    if rows.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let reference: BTreeMap<usize, (f64, String)> = records
        .iter()
        .filter(|r| r.case == table.case && (r.r - table.r).abs() < 5e-4)
        .map(|r| (r.state, (r.e_fci, r.label.clone())))
        .collect();
    let n = rows[0].energies.len();
    let mut series = Vec::new();
    for state in 0..n {
        let points: Vec<Point> = rows
            .iter()
            .filter_map(|row| {
                let e = row.energies[state]?;
                let (fci, _) = reference.get(&state)?;
                let d = (e - fci).abs();
                let y = if d > 0.0 { d.log10().max(ACCURACY_FLOOR) } else { ACCURACY_FLOOR };
                Some(Point { x: row.update as f64, y, range: None })
            })
            .collect();
        if !points.is_empty() {
            let name = reference.get(&state).map_or(format!("state {state}"), |(_, l)| l.clone());
            series.push(Series { name, points, dashed: false, color: state });
        }
    }
    if series.is_empty() {
        return Err(Error::InsufficientData("no reference energies for trace".into()));
    }
    let updates = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.x))
        .fold(1.0, f64::max);
    render(&Chart {
        title: &format!("case ({}) at {:.3} Å: convergence", table.case, table.r),
        x_label: "number of updates",
        y_label: "log10 |E - E_FCI|",
        series: &series,
        x_range: Some((1.0, updates)),
    })
}

/// Writes every chart the data supports: curves and accuracy per case with
/// at least two bond lengths, and one convergence chart per trace table.
pub fn emit_plots(records: &[RunRecord], traces: &[TraceTable], dir: &Path) -> Result<Vec<PathBuf>> {
    let cases: BTreeSet<u8> = records.iter().map(|r| r.case).collect();
    let mut rendered = Vec::new();
    for case in cases {
        if let Ok((curves, acc)) = render_curves(case, records) {
            rendered.push((format!("curves_case{case}.svg"), curves));
            rendered.push((format!("accuracy_case{case}.svg"), acc));
        }
    }
    for t in traces {
        if let Ok(svg) = render_convergence(t, records) {
            rendered.push((format!("convergence_{}_{:.3}.svg", t.case, t.r), svg));
        }
    }
    if rendered.is_empty() {
        return Err(Error::InsufficientData(
            "plots need two bond lengths or at least one trace".into(),
        ));
    }
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for (name, svg) in rendered {
        let path = dir.join(name);
        fs::write(&path, svg)?;
        out.push(path);
    }
    Ok(out)
}
