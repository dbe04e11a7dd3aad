//! Deterministic SVG line charts of scenario CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::CliError;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Header of the scenario CSV schema.
pub const SCENARIO_HEADER: [&str; 6] = ["path", "t", "country", "P", "y", "s"];

/// Named points of one line.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Quantities of one scenario path keyed by column name, each a list of
/// series in order of first appearance.
pub fn read_scenario_csv<R: Read>(reader: R, path_id: u64) -> Result<BTreeMap<&'static str, Vec<Series>>, CliError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("csv header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != SCENARIO_HEADER {
        return Err(CliError::Input(format!("csv header {header:?} does not match {SCENARIO_HEADER:?}")));
    }
    let mut order: Vec<String> = Vec::new();
    let mut cols: BTreeMap<&'static str, BTreeMap<String, Vec<(f64, f64)>>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("csv row {}: {e}", line + 2)))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i].trim().parse().map_err(|_| CliError::Input(format!("csv row {}: bad number {:?}", line + 2, &rec[i])))
        };
        let id: u64 = rec[0].trim().parse().map_err(|_| CliError::Input(format!("csv row {}: bad path id", line + 2)))?;
        if id != path_id {
            continue;
        }
        let (t, country) = (num(1)?, rec[2].to_string());
        if !order.contains(&country) {
            order.push(country.clone());
        }
        for (col, idx) in [("price", 3), ("yield", 4), ("spread", 5)] {
            cols.entry(col).or_default().entry(country.clone()).or_default().push((t, num(idx)?));
        }
    }
    if order.is_empty() {
        return Err(CliError::Input(format!("csv has no rows for path {path_id}")));
    }
    Ok(cols
        .into_iter()
        .map(|(k, mut by)| {
            let series = order.iter().map(|c| Series { label: c.clone(), points: by.remove(c).unwrap_or_default() }).collect();
            (k, series)
        })
        .collect())
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON * hi.abs().max(1.0));
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Multi-series line chart with axes and a legend on a fixed canvas. Colors
/// follow series order.
pub fn render_svg(title: &str, y_name: &str, series: &[Series]) -> Result<String, CliError> {
    if series.is_empty() {
        return Err(CliError::Input("no series to plot".into()));
    }
    if let Some(s) = series.iter().find(|s| s.points.is_empty()) {
        return Err(CliError::Input(format!("series {:?} is empty", s.label)));
    }
    let pts = || series.iter().flat_map(|s| s.points.iter());
    if pts().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(CliError::Input("series contain non-finite values".into()));
    }
    let (mut x0, mut x1) = pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = pts().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 1e-12 * y0.abs().max(1e-12) {
        let pad = 0.5 * y0.abs().max(1e-3);
        (y0, y1) = (y0 - pad, y1 + pad);
    } else {
        let pad = 0.05 * (y1 - y0);
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    x0 = x0.min(x1);
    let (pw, ph) = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT, HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#, MARGIN_LEFT + pw / 2.0, escape(title));
    for t in ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(w, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, MARGIN_TOP, MARGIN_TOP + ph);
        let _ = writeln!(w, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_TOP + ph + 18.0, label(t));
    }
    for t in ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(w, r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, MARGIN_LEFT, MARGIN_LEFT + pw);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_LEFT - 6.0, y + 4.0, label(t));
    }
    let _ = writeln!(
        w,
        r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t</text>"#, MARGIN_LEFT + pw / 2.0, HEIGHT - 16.0);
    let _ = writeln!(
        w,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(y_name)
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for (k, &(x, y)) in s.points.iter().enumerate() {
            let _ = write!(pts, "{}{:.2},{:.2}", if k == 0 { "" } else { " " }, sx(x), sy(y));
        }
        let _ = writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>"#);
        let ly = MARGIN_TOP + 10.0 + 22.0 * i as f64;
        let lx = MARGIN_LEFT + pw + 16.0;
        let _ = writeln!(w, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#, lx + 24.0);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&s.label));
    }
    let _ = writeln!(w, "</svg>");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(label: &str, slope: f64) -> Series {
        Series { label: label.into(), points: (0..5).map(|k| (k as f64, slope * k as f64)).collect() }
    }

    #[test]
    fn ticks_are_round_and_cover_the_range() {
        assert_eq!(ticks(0.0, 2.0, 4), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let t = ticks(0.013, 0.047, 5);
        assert!(t.iter().all(|v| *v >= 0.013 && *v <= 0.047));
        assert!(t.len() >= 3);
    }

    #[test]
    fn chart_has_one_polyline_and_legend_entry_per_series() {
        let svg = render_svg("yields", "y", &[line("A", 1.0), line("B & C", 2.0)]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("B &amp; C"));
        assert!(svg.contains(r#"width="960""#) && svg.contains(r#"height="540""#));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(render_svg("x", "y", &[]).is_err());
        let empty = Series { label: "A".into(), points: vec![] };
        assert!(render_svg("x", "y", &[empty]).is_err());
    }

    #[test]
    fn flat_series_still_renders() {
        let flat = Series { label: "GER".into(), points: vec![(0.0, 0.0), (1.0, 0.0)] };
        assert!(render_svg("spread", "s", &[flat]).unwrap().contains("<polyline"));
    }
}
