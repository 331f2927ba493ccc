use std::fmt::Write as _;

use crate::field_io::FieldSpec;
use crate::geometry::{Point, Polygon};
use crate::planner::PathPlan;
use crate::simulator::SprayMap;

/// Gray level for an applied rate: white at 0, mid-gray at `s_ref`, black
/// from `2 * s_ref` on.
pub fn gray_level(rate: f64, s_ref: f64) -> u8 {
    let t = (rate / (2.0 * s_ref)).clamp(0.0, 1.0);
    (255.0 * (1.0 - t)).round() as u8
}

fn points(pts: &[Point]) -> String {
    let mut s = String::new();
    for (k, p) in pts.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", p.x, p.y);
    }
    s
}

fn ring(out: &mut String, poly: &Polygon, class: &str) {
    let _ = writeln!(
        out,
        r#"<polygon class="{class}" points="{}" fill="none" stroke="black" stroke-width="0.5"/>"#,
        points(poly.vertices())
    );
}

/// Coverage map: one gray polygon per sprayed cell, field rings stroked,
/// the path drawn on top when given. North is up.
pub fn render_svg(map: &SprayMap, field: &FieldSpec, plan: Option<&PathPlan>, s_ref: f64) -> String {
    let (lo, hi) = field.contour.bbox();
    let m = 5.0;
    let (w, h) = (hi.x - lo.x + 2.0 * m, hi.y - lo.y + 2.0 * m);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.2} {h:.2}" width="{:.0}" height="{:.0}">"#,
        w * 2.0,
        h * 2.0
    );
    // flip y so that larger northings are drawn higher
    let _ = writeln!(
        out,
        r#"<g transform="translate({:.2},{:.2}) scale(1,-1)">"#,
        m - lo.x,
        hi.y + m
    );
    let _ = writeln!(out, r#"<g stroke="none">"#);
    for c in &map.cells {
        let g = gray_level(c.applied_rate, s_ref);
        let _ = writeln!(
            out,
            r#"<polygon class="cell" points="{}" fill="rgb({g},{g},{g})"/>"#,
            points(&c.cell.corners)
        );
    }
    out.push_str("</g>\n");
    ring(&mut out, &field.contour, "contour");
    for o in &field.obstacles {
        ring(&mut out, o, "obstacle");
    }
    if let Some(plan) = plan {
        let pts: Vec<Point> = plan.samples.iter().map(|s| s.position).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="path" points="{}" fill="none" stroke="red" stroke-width="0.3"/>"#,
            points(&pts)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_scale_anchors() {
        assert_eq!(gray_level(0.0, 46.78), 255);
        assert_eq!(gray_level(46.78, 46.78), 128);
        assert_eq!(gray_level(200.0, 46.78), 0);
    }
}
