//! Minimal SVG writer: stacked panels of polylines.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const PANEL: f64 = 180.0;
const MARGIN: f64 = 60.0;
const GAP: f64 = 40.0;

/// One panel: a title and its `(x, y)` points. Non-finite points break the
/// line.
pub struct Panel<'a> {
    pub title: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-300_f64.max(1e-12 * lo.abs()) {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn num(v: f64) -> String {
    format!("{v:.4e}")
}

pub fn panels(x_label: &str, panels: &[Panel]) -> String {
    let height = MARGIN + panels.len() as f64 * (PANEL + GAP);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let plot_w = WIDTH - 2.0 * MARGIN;
    for (i, p) in panels.iter().enumerate() {
        let top = 0.5 * MARGIN + i as f64 * (PANEL + GAP);
        let (x0, x1) = range(p.points.iter().map(|q| q.0));
        let (y0, y1) = range(p.points.iter().map(|q| q.1));
        let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
        let py = |y: f64| top + PANEL - (y - y0) / (y1 - y0) * PANEL;
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{top}" width="{plot_w}" height="{PANEL}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="{}">{}</text>"#, top - 4.0, p.title);
        let _ = writeln!(s, r#"<text x="2" y="{}">{}</text>"#, top + 10.0, num(y1));
        let _ = writeln!(s, r#"<text x="2" y="{}">{}</text>"#, top + PANEL, num(y0));
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{}">{x_label} {} .. {}</text>"#,
            top + PANEL + 14.0,
            num(x0),
            num(x1)
        );
        let mut run: Vec<String> = Vec::new();
        let flush = |run: &mut Vec<String>, s: &mut String| {
            if run.len() >= 2 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
                    run.join(" ")
                );
            }
            run.clear();
        };
        for &(x, y) in &p.points {
            if x.is_finite() && y.is_finite() {
                run.push(format!("{:.2},{:.2}", px(x), py(y)));
            } else {
                flush(&mut run, &mut s);
            }
        }
        flush(&mut run, &mut s);
    }
    s.push_str("</svg>\n");
    s
}
