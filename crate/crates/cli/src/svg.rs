//! Minimal deterministic SVG 1.1 renderer: line series, shaded bands,
//! vertical markers and heatmaps.

use std::fmt::Write as _;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Region between two curves sampled at the same x values.
#[derive(Debug, Clone)]
pub struct Band {
    pub color: &'static str,
    pub opacity: f64,
    pub xs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Marker {
    pub x: f64,
    pub label: String,
    pub color: &'static str,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub bands: Vec<Band>,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    /// Text lines printed under the legend.
    pub notes: Vec<String>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Round tick positions covering `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    log_x: bool,
}

impl Frame {
    fn tx(&self, x: f64) -> f64 {
        let (x, lo, hi) = if self.log_x {
            (x.log10(), self.x_lo.log10(), self.x_hi.log10())
        } else {
            (x, self.x_lo, self.x_hi)
        };
        LEFT + (x - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
    }

    fn ty(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>
<text x="{cx}" y="28" text-anchor="middle" font-size="15">{t}</text>"#,
        w = WIDTH,
        h = HEIGHT,
        cx = num((WIDTH - RIGHT + LEFT) / 2.0),
        t = escape(title)
    );
}

fn axis_labels(s: &mut String, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num((WIDTH - RIGHT + LEFT) / 2.0),
        num(HEIGHT - 15.0),
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(y_label),
        y = num((HEIGHT - BOTTOM + TOP) / 2.0),
    );
}

impl Plot {
    fn frame(&self) -> Frame {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for series in &self.series {
            for &(x, y) in &series.points {
                xs.push(x);
                ys.push(y);
            }
        }
        for band in &self.bands {
            xs.extend(&band.xs);
            ys.extend(&band.lower);
            ys.extend(&band.upper);
        }
        xs.extend(self.markers.iter().map(|m| m.x));
        let keep = |v: &f64| v.is_finite() && (!self.log_x || *v > 0.0);
        let xs: Vec<f64> = xs.into_iter().filter(keep).collect();
        let ys: Vec<f64> = ys.into_iter().filter(|v| v.is_finite()).collect();
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut x_lo, mut x_hi) = if xs.is_empty() {
            (1.0, 10.0)
        } else {
            (min(&xs), max(&xs))
        };
        if !(x_hi > x_lo) {
            (x_lo, x_hi) = if self.log_x {
                (x_lo / 10.0, x_hi * 10.0)
            } else {
                padded(x_lo, x_hi)
            };
        }
        let (y_lo, y_hi) = if ys.is_empty() {
            (0.0, 1.0)
        } else {
            padded(min(&ys), max(&ys))
        };
        Frame {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
            log_x: self.log_x,
        }
    }

    pub fn render(&self) -> String {
        let f = self.frame();
        let mut s = String::new();
        header(&mut s, &self.title);
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);

        let x_ticks: Vec<f64> = if f.log_x {
            let (a, b) = (f.x_lo.log10().ceil() as i32, f.x_hi.log10().floor() as i32);
            (a..=b).map(|e| 10f64.powi(e)).collect()
        } else {
            linear_ticks(f.x_lo, f.x_hi)
        };
        for t in x_ticks {
            let x = num(f.tx(t));
            let _ = writeln!(
                s,
                r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#e5e5e5"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"##,
                num(y0),
                num(y1),
                num(y0 + 18.0),
                tick_label(t)
            );
        }
        for t in linear_ticks(f.y_lo, f.y_hi) {
            let y = num(f.ty(t));
            let _ = writeln!(
                s,
                r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#e5e5e5"/><text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"##,
                num(x0),
                num(x1),
                num(x0 - 6.0),
                tick_label(t)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(x0),
            num(y1),
            num(x1 - x0),
            num(y0 - y1)
        );
        axis_labels(&mut s, &self.x_label, &self.y_label);

        for band in &self.bands {
            let mut pts = Vec::new();
            for (&x, &y) in band.xs.iter().zip(&band.upper) {
                pts.push(format!("{},{}", num(f.tx(x)), num(f.ty(y))));
            }
            for (&x, &y) in band.xs.iter().zip(&band.lower).rev() {
                pts.push(format!("{},{}", num(f.tx(x)), num(f.ty(y))));
            }
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{}" fill-opacity="{}" stroke="none"/>"#,
                pts.join(" "),
                band.color,
                band.opacity
            );
        }
        for series in &self.series {
            let pts: Vec<String> = series
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!f.log_x || *x > 0.0))
                .map(|&(x, y)| format!("{},{}", num(f.tx(x)), num(f.ty(y))))
                .collect();
            let dash = if series.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                pts.join(" "),
                series.color
            );
        }
        for m in &self.markers {
            if !m.x.is_finite() || (f.log_x && m.x <= 0.0) {
                continue;
            }
            let x = num(f.tx(m.x));
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{}" stroke-dasharray="2 3"/>"#,
                num(y0),
                num(y1),
                m.color
            );
        }

        let lx = WIDTH - RIGHT + 12.0;
        let mut ly = TOP + 10.0;
        for series in &self.series {
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{y}" dominant-baseline="middle">{}</text>"#,
                num(lx),
                num(lx + 20.0),
                series.color,
                num(lx + 26.0),
                escape(&series.label),
                y = num(ly)
            );
            ly += 18.0;
        }
        for m in &self.markers {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
                num(lx),
                num(ly),
                m.color,
                escape(&m.label)
            );
            ly += 18.0;
        }
        for note in &self.notes {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                num(lx),
                num(ly),
                escape(note)
            );
            ly += 18.0;
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Color-coded grid of values with each cell's label printed inside.
#[derive(Debug, Clone)]
pub struct Heatmap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    /// Row-major: one row per y value.
    pub values: Vec<f64>,
    pub labels: Vec<String>,
}

impl Heatmap {
    pub fn render(&self) -> String {
        let mut s = String::new();
        header(&mut s, &self.title);
        axis_labels(&mut s, &self.x_label, &self.y_label);
        let (nx, ny) = (self.x_values.len().max(1), self.y_values.len().max(1));
        let w = (WIDTH - LEFT - RIGHT) / nx as f64;
        let h = (HEIGHT - TOP - BOTTOM) / ny as f64;
        let finite: Vec<f64> = self
            .values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .collect();
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (j, &yv) in self.y_values.iter().enumerate() {
            // First row at the bottom.
            let y = HEIGHT - BOTTOM - (j + 1) as f64 * h;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
                num(LEFT - 6.0),
                num(y + h / 2.0),
                tick_label(yv)
            );
            for i in 0..self.x_values.len() {
                let k = j * self.x_values.len() + i;
                let v = self.values.get(k).copied().unwrap_or(f64::NAN);
                let t = if hi > lo && v.is_finite() {
                    (v - lo) / (hi - lo)
                } else {
                    0.5
                };
                // Light yellow (low) to dark red (high).
                let r = 255.0 - 80.0 * t;
                let g = 240.0 - 200.0 * t;
                let b = 180.0 - 150.0 * t;
                let x = LEFT + i as f64 * w;
                let _ = writeln!(
                    s,
                    r##"<rect x="{}" y="{}" width="{}" height="{}" fill="rgb({},{},{})" stroke="white"/><text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="10">{}</text>"##,
                    num(x),
                    num(y),
                    num(w),
                    num(h),
                    r.round(),
                    g.round(),
                    b.round(),
                    num(x + w / 2.0),
                    num(y + h / 2.0),
                    escape(self.labels.get(k).map_or("", String::as_str))
                );
            }
        }
        for (i, &xv) in self.x_values.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                num(LEFT + (i as f64 + 0.5) * w),
                num(HEIGHT - BOTTOM + 18.0),
                tick_label(xv)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
