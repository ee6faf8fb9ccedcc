//! Static SVG charts for selection reports.
//!
//! Output is plain text with fixed number formatting, so identical inputs
//! give identical files.

use std::fmt::Write;

use crate::metrics::OverheadRecord;
use crate::select::SeriesPoint;

const W: f64 = 720.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 90.0;
const COLORS: [&str; 3] = ["#4e79a7", "#f28e2b", "#59a14f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Rounds the axis maximum up to a 1/2/5 step so gridlines land on round values.
fn nice_max(x: f64) -> (f64, f64) {
    if x.is_nan() || x <= 0.0 {
        return (1.0, 0.25);
    }
    let mag = 10f64.powf(x.log10().floor());
    let step = [0.1, 0.2, 0.25, 0.5, 1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|s| s * mag)
        .find(|s| (x / s).ceil() <= 5.0)
        .unwrap_or(10.0 * mag);
    ((x / step).ceil() * step, step)
}

struct Frame {
    svg: String,
    y_max: f64,
}

impl Frame {
    fn new(title: &str, y_label: &str, data_max: f64) -> Self {
        let (y_max, step) = nice_max(data_max);
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
        let _ = writeln!(
            svg,
            r#"<text transform="translate(14 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + (H - TOP - BOTTOM) / 2.0,
            escape(y_label)
        );
        let mut f = Frame { svg, y_max };
        let mut v = 0.0;
        while v <= y_max + step * 1e-6 {
            let y = f.y(v);
            let _ = writeln!(f.svg, r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/>"##, W - RIGHT);
            let _ = writeln!(f.svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, LEFT - 4.0, y + 4.0, fmt_tick(v));
            v += step;
        }
        let _ = writeln!(f.svg, r##"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333"/>"##, f.y(0.0), W - RIGHT, f.y(0.0));
        f
    }

    fn y(&self, v: f64) -> f64 {
        let plot = H - TOP - BOTTOM;
        TOP + plot - plot * (v / self.y_max)
    }

    fn slot(n: usize) -> f64 {
        (W - LEFT - RIGHT) / n.max(1) as f64
    }

    fn x_label(&mut self, i: usize, n: usize, label: &str) {
        let x = LEFT + Self::slot(n) * (i as f64 + 0.5);
        let y = H - BOTTOM + 14.0;
        let _ = writeln!(
            self.svg,
            r#"<text transform="translate({x:.1} {y:.1}) rotate(-40)" text-anchor="end">{}</text>"#,
            escape(label)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        for (i, (label, color)) in entries.iter().enumerate() {
            let x = LEFT + 10.0 + 120.0 * i as f64;
            let _ = writeln!(self.svg, r#"<rect x="{x:.1}" y="28" width="10" height="10" fill="{color}"/>"#);
            let _ = writeln!(self.svg, r#"<text x="{:.1}" y="37">{}</text>"#, x + 14.0, escape(label));
        }
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Grouped bars of area, power and timing overhead per candidate, in percent
/// over the design alone. Negative values are drawn at zero.
pub fn overhead_bars(records: &[OverheadRecord]) -> String {
    let proxy = records.iter().any(|r| r.proxy);
    let title = if proxy { "Overhead per assertion (cost-model proxy)" } else { "Overhead per assertion" };
    let max = records.iter().map(|r| r.area_pct.max(r.power_pct).max(r.timing_pct)).fold(0.0, f64::max);
    let mut f = Frame::new(title, "overhead over baseline (%)", max);
    f.legend(&[("area", COLORS[0]), ("power", COLORS[1]), ("timing", COLORS[2])]);
    let slot = Frame::slot(records.len());
    let bar = slot * 0.8 / 3.0;
    for (i, r) in records.iter().enumerate() {
        for (j, v) in [r.area_pct, r.power_pct, r.timing_pct].into_iter().enumerate() {
            let v = v.max(0.0);
            let x = LEFT + slot * i as f64 + slot * 0.1 + bar * j as f64;
            let y = f.y(v);
            let _ = writeln!(
                f.svg,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{bar:.1}" height="{:.1}" fill="{}"><title>{} {:.2}%</title></rect>"#,
                f.y(0.0) - y,
                COLORS[j],
                escape(&r.name),
                v
            );
        }
        f.x_label(i, records.len(), &r.name);
    }
    f.finish()
}

/// One bar per candidate with its covered-node count.
pub fn coverage_bars(rows: &[(String, usize)], total_nodes: usize) -> String {
    let max = rows.iter().map(|r| r.1).max().unwrap_or(0) as f64;
    let mut f = Frame::new(&format!("Covered nodes per assertion (of {total_nodes})"), "covered nodes", max);
    let slot = Frame::slot(rows.len());
    for (i, (name, covered)) in rows.iter().enumerate() {
        let x = LEFT + slot * i as f64 + slot * 0.2;
        let y = f.y(*covered as f64);
        let _ = writeln!(
            f.svg,
            r#"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{} {covered}</title></rect>"#,
            slot * 0.6,
            f.y(0.0) - y,
            COLORS[0],
            escape(name)
        );
        let _ = writeln!(f.svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{covered}</text>"#, x + slot * 0.3, y - 3.0);
        f.x_label(i, rows.len(), name);
    }
    f.finish()
}

/// Cumulative set coverage as candidates are added in order, with its
/// moving average. Selected candidates are marked with filled dots.
pub fn cumulative_plot(series: &[SeriesPoint], selected: &[String], ma_period: usize) -> String {
    let max = series.iter().map(|p| p.pct.max(p.pct_moving_average)).fold(0.0, f64::max);
    let mut f = Frame::new("Cumulative security coverage", "set coverage (%)", max);
    let ma_label = format!("moving average ({ma_period})");
    f.legend(&[("cumulative", COLORS[0]), (&ma_label, COLORS[1])]);
    let slot = Frame::slot(series.len());
    let x = |i: usize| LEFT + slot * (i as f64 + 0.5);
    for (values, color, dash) in [
        (series.iter().map(|p| p.pct).collect::<Vec<_>>(), COLORS[0], ""),
        (series.iter().map(|p| p.pct_moving_average).collect(), COLORS[1], r#" stroke-dasharray="5 3""#),
    ] {
        let pts: Vec<String> = values.iter().enumerate().map(|(i, &v)| format!("{:.1},{:.1}", x(i), f.y(v))).collect();
        let _ = writeln!(f.svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#, pts.join(" "));
    }
    for (i, p) in series.iter().enumerate() {
        let fill = if selected.contains(&p.name) { COLORS[0] } else { "white" };
        let _ = writeln!(
            f.svg,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{fill}" stroke="{}"><title>{} {:.2}% (+{})</title></circle>"#,
            x(i),
            f.y(p.pct),
            COLORS[0],
            escape(&p.name),
            p.pct,
            p.gain
        );
        f.x_label(i, series.len(), &p.name);
    }
    f.finish()
}
