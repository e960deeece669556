//! Minimal deterministic SVG charts.
//!
//! Output depends only on the inputs and [`GENERATOR`], which is written
//! into every document.

use std::fmt::Write as _;

pub const GENERATOR: &str = "redist-svg 1";

const W: f64 = 480.0;
const H: f64 = 320.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 44.0;
const PALETTE: [&str; 7] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let pad = |a: f64, b: f64| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <!-- generator: {GENERATOR} -->\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        "<path d=\"M{l:.1} {t:.1} L{l:.1} {b:.1} L{r:.1} {b:.1}\" stroke=\"black\" fill=\"none\"/>"
    );
    for i in 0..=4 {
        let fx = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let fy = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            f.px(fx),
            b + 14.0,
            tick(fx)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            l - 4.0,
            f.py(fy) + 3.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
        (l + r) / 2.0,
        H - 8.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"12\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 12 {:.1})\">{}</text>",
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn bounds(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// Shaded interval drawn behind a scatter.
#[derive(Debug, Clone, Copy)]
pub struct Band<'a> {
    pub low: f64,
    pub high: f64,
    pub label: &'a str,
    pub color: &'a str,
}

/// Scatter of `points` with optional shaded x-intervals. Each point is one
/// `<circle>`.
pub fn scatter(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)], bands: &[Band<'_>]) -> String {
    let (mut x0, mut x1) = bounds(points.iter().map(|p| p.0).chain(bands.iter().flat_map(|b| [b.low, b.high])));
    let (y0, y1) = bounds(points.iter().map(|p| p.1));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    let f = Frame::new(x0, x1, if y0.is_finite() { y0 } else { 0.0 }, if y1.is_finite() { y1 } else { 1.0 });
    let mut out = String::new();
    open(&mut out, title);
    for (i, b) in bands.iter().enumerate() {
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{TOP:.1}\" width=\"{:.2}\" height=\"{:.1}\" fill=\"{}\" fill-opacity=\"0.2\"/>",
            f.px(b.low),
            (f.px(b.high) - f.px(b.low)).max(1.0),
            H - TOP - BOTTOM,
            b.color
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" fill=\"{}\">{}</text>",
            W - RIGHT - 4.0,
            TOP + 12.0 + 12.0 * i as f64,
            b.color,
            escape(b.label)
        );
    }
    axes(&mut out, &f, x_label, y_label);
    for &(x, y) in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{}\" fill-opacity=\"0.7\"/>",
            f.px(x),
            f.py(y),
            PALETTE[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Single horizontal bar split into labelled shares.
pub fn stacked_bar(title: &str, segments: &[(&str, f64)]) -> String {
    let total: f64 = segments.iter().map(|s| s.1.max(0.0)).sum();
    let mut out = String::new();
    open(&mut out, title);
    let (x0, x1, y, h) = (LEFT, W - RIGHT, 80.0, 60.0);
    let mut x = x0;
    for (i, &(label, v)) in segments.iter().enumerate() {
        let share = if total > 0.0 { v.max(0.0) / total } else { 0.0 };
        let w = share * (x1 - x0);
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{y:.1}\" width=\"{w:.2}\" height=\"{h:.1}\" fill=\"{color}\"/>"
        );
        let _ = writeln!(
            out,
            "<rect x=\"{x0:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{} {:.1}%</text>",
            170.0 + 16.0 * i as f64,
            x0 + 16.0,
            179.0 + 16.0 * i as f64,
            escape(label),
            share * 100.0
        );
        x += w;
    }
    out.push_str("</svg>\n");
    out
}

/// Polyline through `points` (e.g. a cumulative distribution).
pub fn line(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let (x0, x1) = bounds(points.iter().map(|p| p.0));
    let (y0, y1) = bounds(points.iter().map(|p| p.1));
    let f = if points.is_empty() {
        Frame::new(0.0, 1.0, 0.0, 1.0)
    } else {
        Frame::new(x0, x1, y0.min(0.0), y1.max(1.0))
    };
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, x_label, y_label);
    let path: Vec<String> = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| format!("{}{:.2} {:.2}", if i == 0 { 'M' } else { 'L' }, f.px(x), f.py(y)))
        .collect();
    let _ = writeln!(
        out,
        "<path d=\"{}\" stroke=\"{}\" stroke-width=\"1.5\" fill=\"none\"/>",
        path.join(" "),
        PALETTE[0]
    );
    out.push_str("</svg>\n");
    out
}

/// Grouped vertical bars: one group per label, one bar per series.
pub fn bars(title: &str, y_label: &str, labels: &[String], series: &[(&str, Vec<f64>)]) -> String {
    let y1 = bounds(series.iter().flat_map(|s| s.1.iter().copied())).1;
    let f = Frame::new(0.0, labels.len().max(1) as f64, 0.0, if y1.is_finite() && y1 > 0.0 { y1 } else { 1.0 });
    let mut out = String::new();
    open(&mut out, title);
    let (l, r, b) = (LEFT, W - RIGHT, H - BOTTOM);
    let _ = writeln!(
        out,
        "<path d=\"M{l:.1} {TOP:.1} L{l:.1} {b:.1} L{r:.1} {b:.1}\" stroke=\"black\" fill=\"none\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
        l - 4.0,
        TOP + 3.0,
        tick(f.y1)
    );
    let _ = writeln!(
        out,
        "<text x=\"12\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 12 {:.1})\">{}</text>",
        (TOP + b) / 2.0,
        (TOP + b) / 2.0,
        escape(y_label)
    );
    let k = series.len().max(1) as f64;
    for (g, label) in labels.iter().enumerate() {
        let gx = f.px(g as f64);
        let gw = f.px(g as f64 + 1.0) - gx;
        for (si, (_, values)) in series.iter().enumerate() {
            let v = values.get(g).copied().unwrap_or(0.0).max(0.0);
            let bw = gw * 0.8 / k;
            let x = gx + gw * 0.1 + bw * si as f64;
            let _ = writeln!(
                out,
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{bw:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                f.py(v),
                b - f.py(v),
                PALETTE[si % PALETTE.len()]
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            gx + gw / 2.0,
            b + 14.0,
            escape(label)
        );
    }
    for (si, (name, _)) in series.iter().enumerate() {
        let _ = writeln!(
            out,
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>",
            r - 110.0,
            TOP + 16.0 * si as f64,
            PALETTE[si % PALETTE.len()],
            r - 96.0,
            TOP + 9.0 + 16.0 * si as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_has_one_circle_per_point() {
        let pts: Vec<(f64, f64)> = (0..17).map(|i| (i as f64 / 16.0, 0.5)).collect();
        let band = Band {
            low: 0.2,
            high: 0.4,
            label: "range",
            color: "#888",
        };
        let s = scatter("t", "x", "y", &pts, &[band]);
        assert_eq!(s.matches("<circle").count(), 17);
        assert!(s.contains(GENERATOR));
        assert_eq!(s, scatter("t", "x", "y", &pts, &[band]));
    }

    #[test]
    fn escapes_labels() {
        let s = stacked_bar("a<b", &[("x&y", 1.0)]);
        assert!(s.contains("a&lt;b") && s.contains("x&amp;y"));
    }
}
