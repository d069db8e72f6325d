//! Static SVG line charts from result CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::sweep::{read_csv, write_atomic, Method, Metric, ResultRow};
use crate::error::{Error, Result};
use crate::montecarlo::Sic;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Which rows of a result CSV to draw. Empty filters select everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChartSpec {
    pub title: String,
    pub metrics: Vec<Metric>,
    /// Matched against the method column, so `mc-no-ris` selects the baseline.
    pub methods: Vec<String>,
    pub sic: Vec<Sic>,
}

impl ChartSpec {
    fn selects(&self, r: &ResultRow) -> bool {
        (self.metrics.is_empty() || self.metrics.contains(&r.metric))
            && (self.methods.is_empty() || self.methods.iter().any(|m| *m == r.method))
            && (self.sic.is_empty() || self.sic.contains(&r.sic))
    }
}

type SeriesKey = (Metric, String, Sic);

struct Series {
    key: SeriesKey,
    points: Vec<(f64, f64)>,
}

fn series_label(key: &SeriesKey) -> String {
    format!("{} {} {}", key.0.name(), key.1, key.2.name())
}

fn dash(method: &str) -> &'static str {
    match method.split('-').next().and_then(|m| m.parse::<Method>().ok()) {
        Some(Method::Analytic) => "",
        Some(Method::Asymptotic) => " stroke-dasharray=\"6 4\"",
        _ => " stroke-dasharray=\"2 3\"",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|k| k * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Renders the chart as SVG text.
pub fn chart_svg(rows: &[ResultRow], spec: &ChartSpec) -> Result<String> {
    let log_y = {
        let metrics: Vec<Metric> = if spec.metrics.is_empty() {
            rows.iter().map(|r| r.metric).collect()
        } else {
            spec.metrics.clone()
        };
        metrics.iter().all(|m| m.is_probability())
    };
    let mut grouped: BTreeMap<SeriesKey, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows.iter().filter(|r| spec.selects(r)) {
        if log_y && !(r.estimate > 0.0) {
            continue;
        }
        let y = if log_y { r.estimate.log10() } else { r.estimate };
        grouped.entry((r.metric, r.method.clone(), r.sic)).or_default().push((r.value, y));
    }
    let series: Vec<Series> = grouped
        .into_iter()
        .map(|(key, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { key, points }
        })
        .collect();
    if series.is_empty() {
        return Err(Error::Format("chart selection matches no plottable rows".into()));
    }
    let xlabel = rows[0].sweep_var.name();

    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 <= 0.0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if log_y {
        y0 = y0.floor();
        y1 = y1.ceil();
    }
    if y1 - y0 <= 0.0 {
        let pad = if y0 == 0.0 { 1.0 } else { y0.abs() * 0.1 };
        y0 -= pad;
        y1 += pad;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(w, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if !spec.title.is_empty() {
        let _ = writeln!(
            w,
            "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            LEFT + pw / 2.0,
            escape(&spec.title)
        );
    }
    let _ = writeln!(
        w,
        "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{pw:.2}\" height=\"{ph:.2}\" fill=\"none\" stroke=\"black\"/>"
    );

    let yticks: Vec<f64> = if log_y {
        let step = ((y1 - y0) / 8.0).ceil().max(1.0);
        let mut t = Vec::new();
        let mut v = y0;
        while v <= y1 + 1e-9 {
            t.push(v);
            v += step;
        }
        t
    } else {
        nice_ticks(y0, y1)
    };
    for t in yticks {
        let y = py(t);
        let label = if log_y { format!("1e{}", t as i64) } else { tick_label(t) };
        let _ = writeln!(
            w,
            "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>",
            LEFT + pw
        );
        let _ = writeln!(
            w,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{label}</text>",
            LEFT - 6.0,
            y + 4.0
        );
    }
    for t in nice_ticks(x0, x1) {
        let x = px(t);
        let _ = writeln!(
            w,
            "<line x1=\"{x:.2}\" y1=\"{TOP:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            TOP + ph
        );
        let _ = writeln!(
            w,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            TOP + ph + 18.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        w,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(xlabel)
    );
    let ylabel = if log_y { "probability (log)" } else { "estimate" };
    let _ = writeln!(
        w,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">{ylabel}</text>",
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            w,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{}/>",
            pts.join(" "),
            dash(&s.key.1)
        );
        for &(x, y) in &s.points {
            let _ = writeln!(w, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>", px(x), py(y));
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            w,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"{}/>",
            lx + 24.0,
            dash(&s.key.1)
        );
        let _ = writeln!(
            w,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 30.0,
            ly + 4.0,
            escape(&series_label(&s.key))
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads `csv_path`, renders the selected series and writes `svg_path`.
/// Nothing is written when the CSV is malformed or the selection is empty.
pub fn render_chart(csv_path: &Path, spec: &ChartSpec, svg_path: &Path) -> Result<()> {
    let rows = read_csv(csv_path)?;
    let svg = chart_svg(&rows, spec)?;
    write_atomic(svg_path, svg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::SweepVar;

    fn row(value: f64, metric: Metric, method: &str, estimate: f64) -> ResultRow {
        ResultRow {
            sweep_var: SweepVar::PsDbm,
            value,
            metric,
            method: method.into(),
            signal: "data".into(),
            sic: Sic::Ipsic,
            estimate,
            std_err: None,
            trials: None,
            seed: None,
        }
    }

    #[test]
    fn one_series_per_key() {
        let rows = vec![
            row(10.0, Metric::SopData, "analytic", 0.1),
            row(20.0, Metric::SopData, "analytic", 0.01),
            row(10.0, Metric::SopData, "mc", 0.11),
            row(20.0, Metric::SopData, "mc", 0.0),
        ];
        let svg = chart_svg(&rows, &ChartSpec::default()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        // the zero estimate has no place on a log axis
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("1e-2"));
    }

    #[test]
    fn single_point_renders() {
        let rows = vec![row(30.0, Metric::Throughput, "analytic", 1.2)];
        let svg = chart_svg(&rows, &ChartSpec::default()).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn empty_selection_is_an_error() {
        let rows = vec![row(30.0, Metric::SopData, "analytic", 0.5)];
        let spec = ChartSpec { metrics: vec![Metric::EnergyEff], ..Default::default() };
        assert!(matches!(chart_svg(&rows, &spec), Err(Error::Format(_))));
        let zeros = vec![row(30.0, Metric::SopData, "mc", 0.0)];
        assert!(matches!(chart_svg(&zeros, &ChartSpec::default()), Err(Error::Format(_))));
    }

    #[test]
    fn ticks_cover_range() {
        let t = nice_ticks(10.0, 40.0);
        assert_eq!(t, vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]);
        assert_eq!(tick_label(0.30000000000000004), "0.3");
    }
}
