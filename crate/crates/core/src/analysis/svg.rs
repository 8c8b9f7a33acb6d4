//! Minimal static SVG 1.1 line plots.
//!
//! Every series is also written into an XML comment so the numbers behind a
//! figure can be recovered from the file itself.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Dotted,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>, style: Style) -> Self {
        Self {
            name: name.into(),
            points,
            style,
        }
    }
}

/// A 2D plot with optional logarithmic y axis and reference lines.
#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    /// Keep equal scales on both axes (ellipse plots).
    pub equal_aspect: bool,
    pub series: Vec<Series>,
    pub hlines: Vec<(f64, String)>,
    pub vlines: Vec<(f64, String)>,
    /// Free-form lines written as comments and as a footer.
    pub notes: Vec<String>,
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
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

impl Plot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }

    fn usable(&self, y: f64) -> bool {
        y.is_finite() && (!self.log_y || y > 0.0)
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && self.usable(y) {
                    xs.push(x);
                    ys.push(if self.log_y { y.log10() } else { y });
                }
            }
        }
        for (y, _) in &self.hlines {
            if self.usable(*y) {
                ys.push(if self.log_y { y.log10() } else { *y });
            }
        }
        for (x, _) in &self.vlines {
            if x.is_finite() {
                xs.push(*x);
            }
        }
        let range = |v: &[f64]| -> (f64, f64) {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (mut x, mut y) = (range(&xs), range(&ys));
        if self.equal_aspect {
            let pw = WIDTH - LEFT - RIGHT;
            let ph = HEIGHT - TOP - BOTTOM;
            let scale = ((x.1 - x.0) / pw).max((y.1 - y.0) / ph);
            let (cx, cy) = (0.5 * (x.0 + x.1), 0.5 * (y.0 + y.1));
            x = (cx - 0.5 * scale * pw, cx + 0.5 * scale * pw);
            y = (cy - 0.5 * scale * ph, cy + 0.5 * scale * ph);
        }
        (x, y)
    }

    /// Render as an SVG 1.1 document.
    pub fn to_svg(&self) -> String {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| {
            let y = if self.log_y { y.log10() } else { y };
            TOP + (1.0 - (y - y0) / (y1 - y0)) * ph
        };
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        for s in &self.series {
            let data: Vec<String> = s.points.iter().map(|(x, y)| format!("{x},{y}")).collect();
            let _ = writeln!(out, "<!-- data {}: {} -->", escape(&s.name).replace("--", "- -"), data.join(" "));
        }
        for n in &self.notes {
            let _ = writeln!(out, "<!-- note: {} -->", escape(n).replace("--", "- -"));
        }
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for t in nice_ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0,
                format_tick(t)
            );
        }
        for t in nice_ticks(y0, y1) {
            let y = TOP + (1.0 - (t - y0) / (y1 - y0)) * ph;
            let label = if self.log_y { format!("1e{}", format_tick(t)) } else { format_tick(t) };
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (y, label) in &self.hlines {
            if self.usable(*y) {
                let yy = sy(*y);
                let _ = writeln!(
                    out,
                    r##"<line x1="{LEFT}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#555" stroke-dasharray="2,4"/><text x="{}" y="{:.2}" font-family="sans-serif" font-size="10">{}</text>"##,
                    LEFT + pw,
                    LEFT + 4.0,
                    yy - 4.0,
                    escape(label)
                );
            }
        }
        for (x, label) in &self.vlines {
            if x.is_finite() {
                let xx = sx(*x);
                let _ = writeln!(
                    out,
                    r##"<line x1="{xx:.2}" y1="{TOP}" x2="{xx:.2}" y2="{}" stroke="#555" stroke-dasharray="1,3"/><text x="{:.2}" y="{}" font-family="sans-serif" font-size="10">{}</text>"##,
                    TOP + ph,
                    xx + 3.0,
                    TOP + 12.0,
                    escape(label)
                );
            }
        }
        let _ = writeln!(out, r#"<g>"#);
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && self.usable(*y))
                .map(|&(x, y)| (sx(x), sy(y)))
                .collect();
            match s.style {
                Style::Markers => {
                    for (x, y) in &pts {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="none" stroke="{color}"/>"#
                        );
                    }
                }
                style => {
                    // break the polyline wherever a point was dropped
                    let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
                    for &(x, y) in &s.points {
                        if x.is_finite() && self.usable(y) {
                            runs.last_mut().unwrap().push((sx(x), sy(y)));
                        } else if !runs.last().unwrap().is_empty() {
                            runs.push(Vec::new());
                        }
                    }
                    let dash = match style {
                        Style::Dashed => r#" stroke-dasharray="8,4""#,
                        Style::Dotted => r#" stroke-dasharray="2,3""#,
                        _ => "",
                    };
                    for run in runs.iter().filter(|r| !r.is_empty()) {
                        let p: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                        let _ = writeln!(
                            out,
                            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#,
                            p.join(" ")
                        );
                    }
                }
            }
        }
        let _ = writeln!(out, "</g>");
        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let y = TOP + 10.0 + 18.0 * k as f64;
            let x = LEFT + pw + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
                x + 20.0,
                x + 26.0,
                y + 4.0,
                escape(&s.name)
            );
        }
        for (k, n) in self.notes.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#,
                LEFT + pw + 12.0,
                TOP + 18.0 * (self.series.len() as f64 + 1.0) + 14.0 * k as f64,
                escape(n)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn format_tick(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}
