//! Line charts with standard-error bands, written as standalone SVG.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    NoCurves,
    #[error("curve {0:?} has no points")]
    EmptyCurve(String),
    #[error("curve {0:?} has a non-finite value")]
    NonFinite(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    /// `(x, mean, sem)` sorted by `x`.
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Five evenly spaced ticks over `[lo, hi]`, with labels at a precision
/// that tells them apart.
fn ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let step = (hi - lo) / 4.0;
    let digits = if step >= 1.0 { 0 } else { (-step.log10()).ceil() as usize + 1 };
    (0..5)
        .map(|i| {
            let v = lo + step * i as f64;
            (v, format!("{v:.digits$}"))
        })
        .collect()
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        (lo - pad, hi + pad)
    }
}

impl Chart {
    pub fn render(&self) -> Result<String, PlotError> {
        if self.curves.is_empty() {
            return Err(PlotError::NoCurves);
        }
        for c in &self.curves {
            if c.points.is_empty() {
                return Err(PlotError::EmptyCurve(c.label.clone()));
            }
            if c.points.iter().any(|p| !(p.0.is_finite() && p.1.is_finite() && p.2.is_finite())) {
                return Err(PlotError::NonFinite(c.label.clone()));
            }
        }
        let all = self.curves.iter().flat_map(|c| &c.points);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, m, s) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(m - s);
            y1 = y1.max(m + s);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        let (y0, y1) = span(y0, y1);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + pw / 2.0,
            escape(&self.title)
        );
        // axes and ticks
        let _ = writeln!(
            s,
            r#"<path d="M{LEFT:.2},{TOP:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
            TOP + ph,
            LEFT + pw
        );
        for (v, label) in ticks(x0, x1) {
            let x = sx(v);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 19.0
            );
        }
        for (v, label) in ticks(y0, y1) {
            let y = sy(v);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                LEFT - 5.0,
                LEFT - 8.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, c) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let upper = c.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1 + p.2)));
            let lower = c.points.iter().rev().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1 - p.2)));
            let band: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                band.join(" ")
            );
            let line: Vec<String> = c.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                line.join(" ")
            );
            let ly = TOP + 10.0 + 20.0 * i as f64;
            let lx = LEFT + pw + 15.0;
            let _ = writeln!(
                s,
                r#"<g class="legend"><rect x="{lx:.2}" y="{:.2}" width="14" height="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
                ly - 2.0,
                lx + 20.0,
                ly + 4.0,
                escape(&c.label)
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}
