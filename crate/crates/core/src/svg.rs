//! Minimal SVG output: intersection overlays and log-log convergence plots.

use std::fmt::Write as _;

use crate::point::BoundingBox;
use crate::polygon::CurvedPolygon;
use crate::triangle::BezierTriangle;

const SIZE: f64 = 480.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Two triangles (outlined) and their intersection (filled). World
/// coordinates are kept and flipped with a transform so `y` points up.
pub fn intersection_overlay(t0: &BezierTriangle, t1: &BezierTriangle, polygons: &[CurvedPolygon]) -> String {
    let outline = [CurvedPolygon::from_triangle(t0), CurvedPolygon::from_triangle(t1)];
    let bb = outline[0].bounding_box().union(&outline[1].bounding_box());
    let pad = 0.05 * bb.width().max(bb.height()).max(f64::MIN_POSITIVE);
    let bb = bb.inflated(pad);
    let stroke = 0.004 * bb.width().max(bb.height());
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="{} {} {} {}">"#,
        bb.min.x,
        -bb.max.y,
        bb.width(),
        bb.height()
    );
    let _ = writeln!(out, r#"<g transform="scale(1,-1)">"#);
    for p in polygons {
        let _ = writeln!(out, r##"<path d="{}" fill="#ffbf00" fill-opacity="0.6" stroke="none"/>"##, p.to_svg_path());
    }
    for (p, colour) in outline.iter().zip(PALETTE) {
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="{stroke}"/>"#, p.to_svg_path());
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// A named `(h, E)` series.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

/// Log-log plot of error against mesh size, with an optional reference
/// line of the given slope through the last plotted point of the first series.
pub fn loglog_plot(title: &str, series: &[Series<'_>], reference_slope: Option<f64>) -> String {
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|&(h, e)| h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite())
        .map(|(h, e)| (h.log10(), e.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (-1.0, 0.0, -1.0, 0.0);
    if !finite.is_empty() {
        let bb = BoundingBox::from_points(&finite.iter().map(|&(x, y)| crate::Point::new(x, y)).collect::<Vec<_>>());
        x0 = bb.min.x.floor();
        x1 = bb.max.x.ceil().max(x0 + 1.0);
        y0 = bb.min.y.floor();
        y1 = bb.max.y.ceil().max(y0 + 1.0);
    }
    let (left, right, top, bottom) = (70.0, SIZE - 20.0, 40.0, SIZE - 50.0);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let py = |y: f64| bottom - (y - y0) / (y1 - y0) * (bottom - top);

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, SIZE / 2.0, escape(title));
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top);
    for d in (x0 as i64)..=(x1 as i64) {
        let x = px(d as f64);
        let _ = writeln!(out, r##"<line x1="{x}" y1="{top}" x2="{x}" y2="{bottom}" stroke="#ddd"/>"##);
        let _ = writeln!(out, r#"<text x="{x}" y="{}" text-anchor="middle">1e{d}</text>"#, bottom + 16.0);
    }
    for d in (y0 as i64)..=(y1 as i64) {
        let y = py(d as f64);
        let _ = writeln!(out, r##"<line x1="{left}" y1="{y}" x2="{right}" y2="{y}" stroke="#ddd"/>"##);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">h</text>"#, (left + right) / 2.0, SIZE - 12.0);
    let _ = writeln!(out, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">relative L2 error</text>"#, (top + bottom) / 2.0, (top + bottom) / 2.0);

    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|&&(h, e)| h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite())
            .map(|&(h, e)| (px(h.log10()), py(e.log10())))
            .collect();
        if pts.len() > 1 {
            let d: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#, d.join(" "));
        }
        for (x, y) in &pts {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{colour}"/>"#);
        }
        let ly = top + 18.0 + 16.0 * i as f64;
        let _ = writeln!(out, r#"<text x="{}" y="{ly}" fill="{colour}">{}</text>"#, left + 10.0, escape(s.label));
    }

    let anchor = series.first().and_then(|s| s.points.iter().rev().find(|&&(h, e)| h > 0.0 && e > 0.0 && e.is_finite()));
    if let (Some(m), Some(&(h, e))) = (reference_slope, anchor) {
        let (lx, ly) = (h.log10(), e.log10());
        let xa = lx + 0.6 * (x1 - x0).min(1.0);
        let ya = ly + m * (xa - lx);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="5,4"/>"##,
            px(lx),
            py(ly),
            px(xa),
            py(ya)
        );
        let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}" fill="#555">slope {m}</text>"##, px(xa) + 4.0, py(ya));
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
