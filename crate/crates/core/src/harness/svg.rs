//! A minimal SVG line-plot writer: polylines, shaded bands, axes and a legend.

use std::fmt::Write;

use super::output::fmt_num;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub color: String,
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct Band {
    pub label: String,
    pub x: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub color: String,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
    pub markers: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Default::default()
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let xs = self
            .series
            .iter()
            .flat_map(|s| s.x.iter())
            .chain(self.bands.iter().flat_map(|b| b.x.iter()))
            .chain(self.markers.iter().map(|m| &m.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.y.iter())
            .chain(
                self.bands
                    .iter()
                    .flat_map(|b| b.lower.iter().chain(b.upper.iter())),
            )
            .chain(self.markers.iter().map(|m| &m.1));
        let fold = |it: &mut dyn Iterator<Item = &f64>| {
            it.filter(|v| v.is_finite())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                    (a.min(v), b.max(v))
                })
        };
        let (mut x0, mut x1) = fold(&mut { xs });
        let (mut y0, mut y1) = fold(&mut { ys });
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if x1 - x0 <= 0.0 {
            (x0, x1) = (x0 - 0.5, x1 + 0.5);
        }
        if y1 - y0 <= 0.0 {
            (y0, y1) = (y0 - 0.5, y1 + 0.5);
        }
        let pad = 0.05 * (y1 - y0);
        (x0, x1, y0 - pad, y1 + pad)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;
        let pt = |x: f64, y: f64| format!("{},{}", fmt_num(sx(x)), fmt_num(sy(y)));

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = WIDTH,
            h = HEIGHT
        );
        let _ = writeln!(
            s,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            fmt_num(MARGIN_L + pw / 2.0),
            escape(&self.title)
        );

        for b in &self.bands {
            let fwd = b.x.iter().zip(&b.upper).map(|(&x, &y)| pt(x, y));
            let back = b.x.iter().zip(&b.lower).rev().map(|(&x, &y)| pt(x, y));
            let pts: Vec<String> = fwd.chain(back).collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{}" fill-opacity="0.2" stroke="none"/>"#,
                pts.join(" "),
                b.color
            );
        }
        for line in &self.series {
            let pts: Vec<String> = line
                .x
                .iter()
                .zip(&line.y)
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(&x, &y)| pt(x, y))
                .collect();
            let dash = if line.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                pts.join(" "),
                line.color
            );
        }
        for &(x, y) in &self.markers {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="3" fill="black"/>"#,
                fmt_num(sx(x)),
                fmt_num(sy(y))
            );
        }

        // Axes and ticks.
        let (bx, by) = (MARGIN_L, MARGIN_T + ph);
        let _ = writeln!(
            s,
            r#"<path d="M{} {} H{} M{} {} V{}" stroke="black" fill="none"/>"#,
            fmt_num(bx),
            fmt_num(by),
            fmt_num(bx + pw),
            fmt_num(bx),
            fmt_num(by),
            fmt_num(MARGIN_T)
        );
        for v in ticks(x0, x1) {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                fmt_num(sx(v)),
                fmt_num(by + 16.0),
                escape(&short(v))
            );
        }
        for v in ticks(y0, y1) {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                fmt_num(bx - 6.0),
                fmt_num(sy(v) + 4.0),
                escape(&short(v))
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            fmt_num(bx + pw / 2.0),
            fmt_num(HEIGHT - 10.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            fmt_num(MARGIN_T + ph / 2.0),
            fmt_num(MARGIN_T + ph / 2.0),
            escape(&self.y_label)
        );

        let legend = self
            .series
            .iter()
            .map(|l| (&l.label, &l.color, false))
            .chain(self.bands.iter().map(|b| (&b.label, &b.color, true)))
            .filter(|(label, _, _)| !label.is_empty());
        for (i, (label, color, filled)) in legend.enumerate() {
            let y = MARGIN_T + 10.0 + 18.0 * i as f64;
            let x = WIDTH - MARGIN_R + 12.0;
            if filled {
                let _ = writeln!(
                    s,
                    r#"<rect x="{}" y="{}" width="16" height="8" fill="{color}" fill-opacity="0.2"/>"#,
                    fmt_num(x),
                    fmt_num(y - 4.0)
                );
            } else {
                let _ = writeln!(
                    s,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
                    fmt_num(x),
                    fmt_num(y),
                    fmt_num(x + 16.0),
                    fmt_num(y)
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                fmt_num(x + 22.0),
                fmt_num(y + 4.0),
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Compact tick label.
fn short(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let t = format!("{v:.3}");
        let t = t.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".into()
        } else {
            t.to_string()
        }
    }
}
