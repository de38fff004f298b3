//! Static SVG line plots of ladder and field tables.

use std::fmt::Write;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::output::Table;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// First column `k`, every other numeric column a series.
    Ladder,
    /// One-dimensional field: `x1,value,missing`.
    Field,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn parse(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn ladder_series(t: &Table) -> Result<(String, Vec<Series>), CliError> {
    if t.header.first().map(String::as_str) != Some("k") {
        return Err(CliError::Config(format!("{}: a ladder table starts with a k column", t.name)));
    }
    let mut out = Vec::new();
    for (j, label) in t.header.iter().enumerate().skip(1) {
        let cells: Vec<&str> = t.rows.iter().map(|r| r.get(j).map_or("", String::as_str)).collect();
        if cells.iter().any(|c| !c.is_empty() && c.trim().parse::<f64>().is_err()) {
            continue;
        }
        let points: Vec<(f64, f64)> =
            t.rows.iter().filter_map(|r| Some((parse(r.first()?)?, parse(r.get(j)?)?))).collect();
        if !points.is_empty() {
            out.push(Series { label: label.clone(), points });
        }
    }
    if out.is_empty() {
        return Err(CliError::Config(format!("{}: no numeric series", t.name)));
    }
    Ok(("k".into(), out))
}

fn field_series(t: &Table) -> Result<(String, Vec<Series>), CliError> {
    if t.header != ["x1", "value", "missing"] {
        return Err(CliError::Config(format!("{}: a field plot needs columns x1,value,missing, found {}", t.name, t.header.join(","))));
    }
    let mut points = Vec::new();
    for (i, r) in t.rows.iter().enumerate() {
        if r[2] == "1" {
            continue;
        }
        let p = parse(&r[0]).zip(parse(&r[1])).ok_or_else(|| CliError::Config(format!("{}: row {} is not numeric", t.name, i + 2)))?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(CliError::Config(format!("{}: no valued nodes", t.name)));
    }
    Ok(("x1".into(), vec![Series { label: "value".into(), points }]))
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if hi - lo > 1e-12 * hi.abs().max(1.0) {
        (lo, hi)
    } else {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

/// Renders a table as an SVG document; the output depends only on the table contents.
pub fn plot(table: &Table, kind: PlotKind, title: &str) -> Result<String, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Config(format!("{}: table is empty", table.name)));
    }
    let (xlabel, series) = match kind {
        PlotKind::Ladder => ladder_series(table)?,
        PlotKind::Field => field_series(table)?,
    };
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(xv));
        let _ = writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#, LEFT - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, tick_label(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 10.0, escape(&xlabel));
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut pts = ser.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, sx(*x), sy(*y));
        }
        let ly = TOP + 12.0 + 16.0 * i as f64;
        let lx = W - RIGHT + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ladder() -> Table {
        let mut t = Table::new("ladder.csv", &["k", "lk_sum_form", "route_A_value"]);
        for k in [16, 32, 64] {
            t.push(vec![k.to_string(), format!("{}", 0.5 + 1.0 / k as f64), "0.5".into()]);
        }
        t
    }

    #[test]
    fn ladder_plot_is_stable_and_labelled() {
        let a = plot(&ladder(), PlotKind::Ladder, "L_k").unwrap();
        assert_eq!(a, plot(&ladder(), PlotKind::Ladder, "L_k").unwrap());
        assert!(a.contains("lk_sum_form") && a.contains("route_A_value"));
        assert_eq!(a.matches("<polyline").count(), 2);
    }

    #[test]
    fn schema_and_empty_tables_are_rejected() {
        assert!(plot(&ladder(), PlotKind::Field, "f").is_err());
        let empty = Table::new("e.csv", &["k", "v"]);
        assert!(plot(&empty, PlotKind::Ladder, "e").is_err());
        let mut f = Table::new("f.csv", &["x1", "value", "missing"]);
        f.push(vec!["0.5".into(), String::new(), "1".into()]);
        assert!(plot(&f, PlotKind::Field, "f").is_err());
        f.push(vec!["0.25".into(), "-0.5".into(), "0".into()]);
        assert!(plot(&f, PlotKind::Field, "f").unwrap().contains("<polyline"));
    }

    #[test]
    fn tick_labels_are_compact() {
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(-0.0), "0");
        assert_eq!(tick_label(2.0), "2");
        assert_eq!(tick_label(1e-6), "1.00e-6");
    }
}
