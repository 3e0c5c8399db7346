//! Minimal static SVG charts. Coordinates are printed with two decimals so
//! output is byte-stable.

use std::fmt::Write;

use super::RatioSummary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;

pub(crate) struct Frame<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

/// Smallest multiple of 0.05 at or above `v`, at least 0.05.
pub(crate) fn nice_ceil(v: f64) -> f64 {
    ((v / 0.05).ceil() * 0.05).max(0.05)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

struct Canvas {
    out: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Canvas {
    fn new(frame: &Frame) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let mut c = Canvas {
            out: String::new(),
            x: widen(frame.x),
            y: widen(frame.y),
        };
        let _ = writeln!(
            c.out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(c.out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        c.text(WIDTH / 2.0, 22.0, "middle", frame.title, 14);
        c.text(
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            HEIGHT - 15.0,
            "middle",
            frame.xlabel,
            12,
        );
        let _ = writeln!(
            c.out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(frame.ylabel)
        );
        let _ = writeln!(
            c.out,
            r#"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        c
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str, size: u32) {
        let _ = writeln!(
            self.out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="{size}">{}</text>"#,
            escape(s)
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(
            self.out,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#
        );
    }

    fn y_ticks(&mut self) {
        for i in 0..=TICKS {
            let v = self.y.0 + (self.y.1 - self.y.0) * i as f64 / TICKS as f64;
            let y = self.py(v);
            self.line(LEFT - 5.0, y, LEFT, y, r#"stroke="black""#);
            self.text(LEFT - 8.0, y + 4.0, "end", &tick_label(v), 11);
        }
    }

    fn x_ticks(&mut self) {
        for i in 0..=TICKS {
            let v = self.x.0 + (self.x.1 - self.x.0) * i as f64 / TICKS as f64;
            let x = self.px(v);
            let base = HEIGHT - BOTTOM;
            self.line(x, base, x, base + 5.0, r#"stroke="black""#);
            self.text(x, base + 18.0, "middle", &tick_label(v), 11);
        }
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

pub(crate) fn boxplot(title: &str, xlabel: &str, ylabel: &str, groups: &[RatioSummary]) -> String {
    let lo = groups.iter().map(|s| s.min).fold(f64::INFINITY, f64::min);
    let hi = groups.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() {
        ((lo * 20.0).floor() / 20.0, (hi * 20.0).ceil() / 20.0)
    } else {
        (0.0, 1.0)
    };
    let mut c = Canvas::new(&Frame {
        title,
        xlabel,
        ylabel,
        x: (0.5, groups.len() as f64 + 0.5),
        y: (lo, hi),
    });
    c.y_ticks();
    let half = 0.3 * (WIDTH - LEFT - RIGHT) / (groups.len().max(1) as f64 + 1.0);
    for (i, s) in groups.iter().enumerate() {
        let x = c.px(i as f64 + 1.0);
        let (ymin, yq1, ymed, yq3, ymax) = (c.py(s.min), c.py(s.q1), c.py(s.median), c.py(s.q3), c.py(s.max));
        c.line(x, ymin, x, yq1, r#"stroke="black""#);
        c.line(x, yq3, x, ymax, r#"stroke="black""#);
        c.line(x - half / 2.0, ymin, x + half / 2.0, ymin, r#"stroke="black""#);
        c.line(x - half / 2.0, ymax, x + half / 2.0, ymax, r#"stroke="black""#);
        let _ = writeln!(
            c.out,
            r##"<rect x="{:.2}" y="{yq3:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="black"/>"##,
            x - half,
            2.0 * half,
            yq1 - yq3
        );
        c.line(x - half, ymed, x + half, ymed, r##"stroke="#d62728" stroke-width="2""##);
        c.text(x, HEIGHT - BOTTOM + 18.0, "middle", &s.group, 11);
    }
    c.finish()
}

pub(crate) fn scatter(frame: &Frame, points: &[(f64, f64)], trend: Option<(f64, f64)>) -> String {
    let mut c = Canvas::new(frame);
    c.x_ticks();
    c.y_ticks();
    for &(x, y) in points {
        let _ = writeln!(
            c.out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#1f77b4" fill-opacity="0.6"/>"##,
            c.px(x),
            c.py(y)
        );
    }
    if let Some((slope, intercept)) = trend {
        let (x0, x1) = c.x;
        let (y0, y1) = (slope * x0 + intercept, slope * x1 + intercept);
        let (a, b, d, e) = (c.px(x0), c.py(y0), c.px(x1), c.py(y1));
        c.line(a, b, d, e, r##"stroke="#d62728" stroke-width="1.5""##);
    }
    c.finish()
}
