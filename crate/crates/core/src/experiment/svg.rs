//! Minimal SVG line charts: axes, ticks, polylines and shaded bands.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Optional `(lower, upper)` band drawn under the line.
    pub band: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub lines: Vec<Line>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log {
                if v > 0.0 {
                    v.log10()
                } else {
                    continue;
                }
            } else {
                v
            };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 1.0 };
            (lo, hi) = (lo - pad, hi + pad);
        } else {
            let pad = (hi - lo) * 0.05;
            (lo, hi) = (lo - pad, hi + pad);
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v > 0.0 {
                v.log10()
            } else {
                return None;
            }
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|i| {
                let u = i as f64 / 4.0;
                let v = self.lo + u * (self.hi - self.lo);
                let label = if self.log { format!("1e{v:.1}") } else { format!("{v:.3}") };
                (u, label)
            })
            .collect()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn render(&self) -> String {
        let xs = self.lines.iter().flat_map(|l| l.xs.iter().copied());
        let ys = self.lines.iter().flat_map(|l| {
            let band = l.band.iter().flat_map(|(a, b)| a.iter().chain(b.iter()).copied());
            l.ys.iter().copied().chain(band)
        });
        let ax = Axis::fit(xs, self.log_x);
        let ay = Axis::fit(ys, self.log_y);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |u: f64| LEFT + u * pw;
        let py = |u: f64| TOP + (1.0 - u) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<path d="M{:.1},{:.1} L{:.1},{:.1} L{:.1},{:.1}" fill="none" stroke="black"/>"#,
            px(0.0),
            py(1.0),
            px(0.0),
            py(0.0),
            px(1.0),
            py(0.0)
        );
        for (u, label) in ax.ticks() {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="black"/><text x="{0:.1}" y="{3:.1}" text-anchor="middle">{4}</text>"#,
                px(u),
                py(0.0),
                py(0.0) + 5.0,
                py(0.0) + 18.0,
                label
            );
        }
        for (u, label) in ay.ticks() {
            let _ = writeln!(
                s,
                r#"<line x1="{0:.1}" y1="{1:.1}" x2="{2:.1}" y2="{1:.1}" stroke="black"/><text x="{3:.1}" y="{4:.1}" text-anchor="end">{5}</text>"#,
                px(0.0) - 5.0,
                py(u),
                px(0.0),
                px(0.0) - 8.0,
                py(u) + 4.0,
                label
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            px(0.5),
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            py(0.5),
            py(0.5),
            escape(&self.y_label)
        );

        for (i, line) in self.lines.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            if let Some((lo, hi)) = &line.band {
                let mut pts = Vec::new();
                for (x, y) in line.xs.iter().zip(hi) {
                    if let (Some(u), Some(v)) = (ax.unit(*x), ay.unit(*y)) {
                        pts.push(format!("{:.2},{:.2}", px(u), py(v)));
                    }
                }
                for (x, y) in line.xs.iter().zip(lo).rev() {
                    if let (Some(u), Some(v)) = (ax.unit(*x), ay.unit(*y)) {
                        pts.push(format!("{:.2},{:.2}", px(u), py(v)));
                    }
                }
                let _ = writeln!(
                    s,
                    r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                    pts.join(" ")
                );
            }
            let pts: Vec<String> = line
                .xs
                .iter()
                .zip(&line.ys)
                .filter_map(|(x, y)| Some(format!("{:.2},{:.2}", px(ax.unit(*x)?), py(ay.unit(*y)?))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                pts.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
                px(0.0) + 10.0,
                TOP + 14.0 * (i as f64 + 1.0),
                escape(&line.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
