//! Seeded synthetic fields, sized like ordinary arable fields (10-18 ha).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::FieldSpec;
use crate::geometry::{Point, Polygon};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Rectangle,
    ConvexPolygon,
    LShape,
    Obstacles,
}

impl FieldKind {
    pub const CYCLE: [FieldKind; 4] = [
        FieldKind::Rectangle,
        FieldKind::ConvexPolygon,
        FieldKind::LShape,
        FieldKind::Obstacles,
    ];

    pub fn is_convex(self) -> bool {
        matches!(self, FieldKind::Rectangle | FieldKind::ConvexPolygon)
    }
}

fn rotate(points: Vec<Point>, angle: f64) -> Vec<Point> {
    let (s, c) = angle.sin_cos();
    points
        .into_iter()
        .map(|p| Point::new(c * p.x - s * p.y, s * p.x + c * p.y))
        .collect()
}

fn edge_midpoint(poly: &Polygon) -> Point {
    let v = poly.vertices();
    v[0].lerp(v[1], 0.5)
}

fn finish(id: String, outer: Vec<Point>, holes: Vec<Vec<Point>>) -> FieldSpec {
    let contour = Polygon::new(outer).expect("generator emits valid rings");
    let holes = holes
        .into_iter()
        .map(|h| Polygon::new(h).expect("generator emits valid rings"))
        .collect();
    let entry = edge_midpoint(&contour);
    FieldSpec::new(id, contour, holes, entry).expect("generator emits valid fields")
}

/// Axis-aligned rectangle with its lower-left corner at the origin and the
/// entry at the middle of the bottom edge.
pub fn rectangle_field(id: &str, width: f64, height: f64) -> FieldSpec {
    finish(
        id.to_string(),
        Polygon::rectangle(0.0, 0.0, width, height).vertices().to_vec(),
        Vec::new(),
    )
}

pub fn generate(kind: FieldKind, id: String, rng: &mut ChaCha8Rng) -> FieldSpec {
    let angle = rng.gen_range(0.0..PI / 2.0);
    match kind {
        FieldKind::Rectangle => {
            let w = rng.gen_range(380.0..460.0);
            let h = rng.gen_range(260.0..320.0);
            let r = Polygon::rectangle(0.0, 0.0, w, h).vertices().to_vec();
            finish(id, rotate(r, angle), Vec::new())
        }
        FieldKind::ConvexPolygon => {
            let n = rng.gen_range(5..=8);
            let a = rng.gen_range(225.0..255.0);
            let b = rng.gen_range(160.0..185.0);
            let pts = (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64 + rng.gen_range(-0.12..0.12);
                    Point::new(a * t.cos(), b * t.sin())
                })
                .collect();
            finish(id, rotate(pts, angle), Vec::new())
        }
        FieldKind::LShape => {
            let w = rng.gen_range(420.0..500.0);
            let h = rng.gen_range(320.0..370.0);
            let nw = rng.gen_range(150.0..190.0);
            let nh = rng.gen_range(120.0..150.0);
            let pts = vec![
                Point::new(0.0, 0.0),
                Point::new(w, 0.0),
                Point::new(w, h - nh),
                Point::new(w - nw, h - nh),
                Point::new(w - nw, h),
                Point::new(0.0, h),
            ];
            finish(id, rotate(pts, angle), Vec::new())
        }
        FieldKind::Obstacles => {
            let w = rng.gen_range(420.0..470.0);
            let h = rng.gen_range(300.0..340.0);
            let count = rng.gen_range(1..=3);
            // well-separated candidate centres keep obstacle headlands apart
            let centres = [(0.28, 0.5), (0.62, 0.3), (0.7, 0.72)];
            let holes = centres[..count]
                .iter()
                .map(|&(fx, fy)| {
                    let s = rng.gen_range(12.0..24.0);
                    let cx = fx * w + rng.gen_range(-10.0..10.0);
                    let cy = fy * h + rng.gen_range(-10.0..10.0);
                    let sq = Polygon::rectangle(cx - s / 2.0, cy - s / 2.0, cx + s / 2.0, cy + s / 2.0);
                    rotate(sq.vertices().to_vec(), angle)
                })
                .collect();
            let outer = Polygon::rectangle(0.0, 0.0, w, h).vertices().to_vec();
            finish(id, rotate(outer, angle), holes)
        }
    }
}

/// `n` fields cycling through every kind; identical seeds give identical fields.
pub fn generate_fields(n: usize, seed: u64) -> Vec<(FieldKind, FieldSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|k| {
            let kind = FieldKind::CYCLE[k % FieldKind::CYCLE.len()];
            (kind, generate(kind, format!("field{:02}", k + 1), &mut rng))
        })
        .collect()
}
