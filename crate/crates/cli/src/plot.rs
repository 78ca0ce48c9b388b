//! Static SVG scatter plots of eigenvalues with boundary overlays.

use std::fmt::Write;

use matdiff::Complex64;

const PALETTE: [&str; 10] = [
    "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f", "#1f77b4",
];
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_BOTTOM: f64 = 52.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_RIGHT: f64 = 16.0;

/// Square data window covering everything, padded by 6%.
fn window(points: &[Complex64], curves: &[Vec<Vec<Complex64>>]) -> (f64, f64, f64) {
    let all = points.iter().chain(curves.iter().flatten().flatten());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in all {
        x0 = x0.min(z.re);
        x1 = x1.max(z.re);
        y0 = y0.min(z.im);
        y1 = y1.max(z.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-9) * 1.12;
    (0.5 * (x0 + x1) - 0.5 * span, 0.5 * (y0 + y1) - 0.5 * span, span)
}

/// A 1-2-5 tick step giving about five ticks over `span`.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap()
}

fn label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        s
    }
}

/// Renders the figure. `curves` holds one list of closed polygons per input
/// boundary; each boundary gets its own colour.
pub fn render(points: &[Complex64], curves: &[Vec<Vec<Complex64>>], size: f64) -> String {
    let (x0, y0, span) = window(points, curves);
    let scale = size / span;
    let px = |x: f64| MARGIN_LEFT + (x - x0) * scale;
    let py = |y: f64| MARGIN_TOP + size - (y - y0) * scale;
    let width = MARGIN_LEFT + size + MARGIN_RIGHT;
    let height = MARGIN_TOP + size + MARGIN_BOTTOM;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<defs><clipPath id="plot"><rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{size}" height="{size}"/></clipPath></defs>"#).unwrap();

    // ticks and grid
    let step = tick_step(span);
    let mut t = (x0 / step).ceil() * step;
    while t <= x0 + span {
        let x = px(t);
        writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000" stroke-width="1"/>"##, MARGIN_TOP + size, MARGIN_TOP + size + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_TOP + size + 18.0, label(t, step)).unwrap();
        t += step;
    }
    let mut t = (y0 / step).ceil() * step;
    while t <= y0 + span {
        let y = py(t);
        writeln!(s, r##"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="#000" stroke-width="1"/>"##, MARGIN_LEFT - 5.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_LEFT - 8.0, y + 4.0, label(t, step)).unwrap();
        t += step;
    }
    if (x0..=x0 + span).contains(&0.0) {
        let x = px(0.0);
        writeln!(s, r##"<line x1="{x:.2}" y1="{MARGIN_TOP}" x2="{x:.2}" y2="{:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##, MARGIN_TOP + size).unwrap();
    }
    if (y0..=y0 + span).contains(&0.0) {
        let y = py(0.0);
        writeln!(s, r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#bbb" stroke-dasharray="4 3"/>"##, MARGIN_LEFT + size).unwrap();
    }

    writeln!(s, r#"<g clip-path="url(#plot)">"#).unwrap();
    if !points.is_empty() {
        writeln!(s, r##"<g fill="#1f4e9a" fill-opacity="0.45">"##).unwrap();
        for z in points {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.3"/>"#, px(z.re), py(z.im)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    for (k, polys) in curves.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        for poly in polys {
            let pts: Vec<String> = poly.iter().map(|z| format!("{:.2},{:.2}", px(z.re), py(z.im))).collect();
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.4"/>"#, pts.join(" ")).unwrap();
        }
    }
    writeln!(s, "</g>").unwrap();

    writeln!(s, r##"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{size}" height="{size}" fill="none" stroke="#000"/>"##).unwrap();
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">Re λ</text>"#, MARGIN_LEFT + size / 2.0, height - 12.0).unwrap();
    let (lx, ly) = (18.0, MARGIN_TOP + size / 2.0);
    writeln!(s, r#"<text x="{lx}" y="{ly:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 {lx} {ly:.2})">Im λ</text>"#).unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps_are_one_two_five() {
        assert_eq!(tick_step(10.0), 2.0);
        assert_eq!(tick_step(4.0), 1.0);
        assert_eq!(tick_step(0.2), 0.05);
    }

    #[test]
    fn labels_drop_negative_zero() {
        assert_eq!(label(-1e-17, 0.5), "0");
        assert_eq!(label(1.5, 0.5), "1.5");
        assert_eq!(label(2.0, 1.0), "2");
    }

    #[test]
    fn single_point_has_a_window() {
        let svg = render(&[Complex64::new(1.0, 0.0)], &[], 300.0);
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("NaN"));
    }
}
