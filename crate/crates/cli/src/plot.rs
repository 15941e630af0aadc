//! Minimal SVG charts: class-coloured scatter plots and metric-vs-IR lines.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const NEGATIVE_COLOR: &str = "#1f77b4";
const POSITIVE_COLOR: &str = "#d62728";
const LINE_COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub positive: bool,
    pub synthetic: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Linear map from a data range to a pixel range; degenerate ranges map to the centre.
fn scale(lo: f64, hi: f64, p0: f64, p1: f64) -> impl Fn(f64) -> f64 {
    move |v| if hi > lo { p0 + (v - lo) / (hi - lo) * (p1 - p0) } else { (p0 + p1) / 2.0 }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(out, r##"<line class="axis" x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="#333"/>"##);
    let _ = writeln!(out, r##"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#333"/>"##);
}

/// Scatter plot; real rows are filled circles, synthetic rows hollow squares.
/// Every sample is one element carrying the `point` class.
pub fn scatter_svg(points: &[ScatterPoint], title: &str) -> String {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let sx = scale(xmin, xmax, MARGIN + 8.0, WIDTH - MARGIN - 8.0);
    let sy = scale(ymin, ymax, HEIGHT - MARGIN - 8.0, MARGIN + 8.0);
    let mut out = String::new();
    header(&mut out, title);
    if !points.is_empty() {
        for (v, x, anchor) in [(xmin, MARGIN, "start"), (xmax, WIDTH - MARGIN, "end")] {
            let _ = writeln!(
                out,
                r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{}</text>"#,
                HEIGHT - MARGIN + 16.0,
                fmt_num(v)
            );
        }
        for (v, y) in [(ymin, HEIGHT - MARGIN), (ymax, MARGIN + 10.0)] {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{y}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
                MARGIN - 4.0,
                fmt_num(v)
            );
        }
    }
    let _ = writeln!(out, r#"<g class="points">"#);
    for p in points {
        let color = if p.positive { POSITIVE_COLOR } else { NEGATIVE_COLOR };
        let class = if p.positive { "positive" } else { "negative" };
        let (cx, cy) = (sx(p.x), sy(p.y));
        if p.synthetic {
            let _ = writeln!(
                out,
                r#"<rect class="point {class} synthetic" x="{:.2}" y="{:.2}" width="6" height="6" fill="none" stroke="{color}"/>"#,
                cx - 3.0,
                cy - 3.0
            );
        } else {
            let _ = writeln!(
                out,
                r#"<circle class="point {class} real" cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{color}" fill-opacity="0.7"/>"#
            );
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// One value per x category, `None` where the method has no result.
    pub values: Vec<Option<f64>>,
}

/// Line chart with one evenly spaced x tick per category and a [0, 1] y axis.
pub fn metric_chart_svg(x_labels: &[String], series: &[Series], title: &str, y_label: &str) -> String {
    let n = x_labels.len();
    let x_at = |i: usize| {
        if n <= 1 {
            WIDTH / 2.0
        } else {
            MARGIN + 24.0 + i as f64 * (WIDTH - 2.0 * MARGIN - 48.0) / (n - 1) as f64
        }
    };
    let sy = scale(0.0, 1.0, HEIGHT - MARGIN, MARGIN);
    let mut out = String::new();
    header(&mut out, title);
    for (i, label) in x_labels.iter().enumerate() {
        let x = x_at(i);
        let _ = writeln!(
            out,
            r##"<g class="xtick"><line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#333"/><text x="{x:.2}" y="{yt}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text></g>"##,
            escape(label),
            y0 = HEIGHT - MARGIN,
            y1 = HEIGHT - MARGIN + 5.0,
            yt = HEIGHT - MARGIN + 18.0
        );
    }
    for k in 0..=5 {
        let v = k as f64 / 5.0;
        let y = sy(v);
        let _ = writeln!(
            out,
            r##"<g class="ytick"><line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#333"/><text x="{xt}" y="{y:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text></g>"##,
            fmt_num(v),
            x0 = MARGIN - 5.0,
            x1 = MARGIN,
            xt = MARGIN - 8.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">imbalance ratio</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (s_idx, s) in series.iter().enumerate() {
        let color = LINE_COLORS[s_idx % LINE_COLORS.len()];
        let pts: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| format!("{:.2},{:.2}", x_at(i), sy(v))))
            .collect();
        let _ = writeln!(out, r#"<g class="series" data-label="{}">"#, escape(&s.label));
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, pts.join(" "));
        for p in &pts {
            let (x, y) = p.split_once(',').expect("formatted above");
            let _ = writeln!(out, r#"<circle class="marker" cx="{x}" cy="{y}" r="3.5" fill="{color}"/>"#);
        }
        let ly = MARGIN + 14.0 * s_idx as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 90.0,
            escape(&s.label)
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
