//! Planar polygon kernel used by the planner and the spray simulator.
//!
//! All coordinates are metric (east, north) in metres. Outer rings are
//! counter-clockwise, hole rings clockwise.

mod cell;
mod offset;
pub mod raster;
mod union;

pub use cell::{CellKind, QuadCell};
pub use offset::offset_inward;
pub(crate) use offset::offset_left;
pub use union::{union_area, SprayedArea};

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points closer than this to a ring edge count as inside.
pub const BOUNDARY_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("ring has {0} vertices, at least 3 are required")]
    Degenerate(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("field too small for headland: inward offset by {distance} m annihilates the polygon")]
    OffsetCollapsed { distance: f64 },
    #[error("ring self-intersects: edge {first} crosses edge {second}")]
    SelfIntersecting { first: usize, second: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Unit vector for a heading measured counter-clockwise from east.
    pub fn from_heading(heading: f64) -> Self {
        Self::new(heading.cos(), heading.sin())
    }

    /// Unit normal pointing to the right of a heading.
    pub fn right_of(heading: f64) -> Self {
        Self::new(heading.sin(), -heading.cos())
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Closed ring without a repeated first vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate(vertices.len()));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle, counter-clockwise.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            vertices: vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Iterator over `(start, end)` of every edge, including the closing one.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        polygon_area(self)
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn reversed(&self) -> Polygon {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Polygon { vertices }
    }

    /// Same ring with counter-clockwise orientation.
    pub fn to_ccw(&self) -> Polygon {
        if self.is_ccw() {
            self.clone()
        } else {
            self.reversed()
        }
    }

    /// Same ring with clockwise orientation.
    pub fn to_cw(&self) -> Polygon {
        if self.is_ccw() {
            self.reversed()
        } else {
            self.clone()
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Area centroid of the ring.
    pub fn centroid(&self) -> Point {
        let a = self.signed_area();
        if a.abs() < 1e-15 {
            let n = self.vertices.len() as f64;
            let s = self.vertices.iter().fold(Point::default(), |acc, &p| acc + p);
            return s * (1.0 / n);
        }
        let (mut cx, mut cy) = (0.0, 0.0);
        for (p, q) in self.edges() {
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox_of(&self.vertices)
    }

    /// Distance from `p` to the nearest point on the ring boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// First pair of non-adjacent crossing edges, if any.
    pub fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn validate_simple(&self) -> Result<(), GeometryError> {
        match self.find_self_intersection() {
            Some((first, second)) => Err(GeometryError::SelfIntersecting { first, second }),
            None => Ok(()),
        }
    }

    pub fn translated(&self, by: Point) -> Polygon {
        Polygon {
            vertices: self.vertices.iter().map(|&p| p + by).collect(),
        }
    }
}

pub fn bbox_of(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

/// Signed shoelace area; positive for counter-clockwise rings.
pub fn polygon_area(poly: &Polygon) -> f64 {
    ring_signed_area(&poly.vertices)
}

pub(crate) fn ring_signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut sum = 0.0;
    for i in 0..n {
        sum += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * sum
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - BOUNDARY_EPS
        && p.x <= a.x.max(b.x) + BOUNDARY_EPS
        && p.y >= a.y.min(b.y) - BOUNDARY_EPS
        && p.y <= a.y.max(b.y) + BOUNDARY_EPS
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Intersection point of the infinite lines through `p + t*r` and `q + u*s`.
pub(crate) fn line_intersection(p: Point, r: Point, q: Point, s: Point) -> Option<Point> {
    let denom = r.cross(s);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (q - p).cross(s) / denom;
    Some(p + r * t)
}

/// Even-odd crossing test on a single ring, with boundary points inside.
pub fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if point_segment_distance(p, a, b) <= BOUNDARY_EPS {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// True iff `p` lies inside `outer` and outside every hole. Points within
/// [`BOUNDARY_EPS`] of the outer ring are inside; points on a hole boundary
/// are inside as well (they touch the region's closure).
pub fn point_in_polygon(p: Point, outer: &Polygon, holes: &[Polygon]) -> bool {
    if !point_in_ring(p, &outer.vertices) {
        return false;
    }
    holes.iter().all(|h| {
        h.boundary_distance(p) <= BOUNDARY_EPS || !point_in_ring(p, &h.vertices)
    })
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Polygon {
        Polygon::rectangle(0.0, 0.0, 1.0, 1.0)
    }

    #[test]
    fn unit_square_area_and_orientation() {
        assert_eq!(polygon_area(&unit_square()), 1.0);
        assert_eq!(polygon_area(&unit_square().reversed()), -1.0);
    }

    #[test]
    fn degenerate_ring_is_rejected() {
        let err = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).unwrap_err();
        assert_eq!(err, GeometryError::Degenerate(2));
    }

    /// Star-shaped random 12-gon around the origin.
    fn random_12gon(rng: &mut ChaCha8Rng) -> Polygon {
        let pts = (0..12)
            .map(|k| {
                let a = k as f64 / 12.0 * std::f64::consts::TAU;
                let r = rng.gen_range(3.0..10.0);
                Point::new(r * a.cos(), r * a.sin())
            })
            .collect();
        Polygon::new(pts).unwrap()
    }

    #[test]
    fn shoelace_matches_rejection_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let poly = random_12gon(&mut rng);
            let (lo, hi) = poly.bbox();
            let n = 400_000;
            let mut hits = 0usize;
            for _ in 0..n {
                let p = Point::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
                if point_in_ring(p, poly.vertices()) {
                    hits += 1;
                }
            }
            let box_area = (hi.x - lo.x) * (hi.y - lo.y);
            let mc = box_area * hits as f64 / n as f64;
            let exact = polygon_area(&poly);
            assert!((mc - exact).abs() / exact < 0.005, "mc {mc} exact {exact}");
        }
    }

    #[test]
    fn point_in_polygon_basic_cases() {
        let outer = Polygon::rectangle(0.0, 0.0, 10.0, 10.0);
        let hole = Polygon::rectangle(4.0, 4.0, 6.0, 6.0).to_cw();
        assert!(point_in_polygon(Point::new(0.5, 0.5), &unit_square(), &[]));
        assert!(!point_in_polygon(Point::new(5.0, 5.0), &outer, std::slice::from_ref(&hole)));
        assert!(point_in_polygon(Point::new(2.0, 5.0), &outer, &[hole]));
        // boundary resolves inside
        assert!(point_in_polygon(Point::new(10.0, 3.0), &outer, &[]));
        assert!(point_in_polygon(Point::new(10.0 + 5e-10, 3.0), &outer, &[]));
        assert!(!point_in_polygon(Point::new(10.0 + 1e-6, 3.0), &outer, &[]));
    }

    /// Independent winding-number classification.
    fn winding_number(p: Point, ring: &[Point]) -> i32 {
        let mut wn = 0;
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let side = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
            if a.y <= p.y {
                if b.y > p.y && side > 0.0 {
                    wn += 1;
                }
            } else if b.y <= p.y && side < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    #[test]
    fn agrees_with_winding_number_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let poly = random_12gon(&mut rng);
        let hole = Polygon::rectangle(-1.0, -1.0, 1.0, 1.0).to_cw();
        for _ in 0..1000 {
            let p = Point::new(rng.gen_range(-11.0..11.0), rng.gen_range(-11.0..11.0));
            if poly.boundary_distance(p) < 1e-6 || hole.boundary_distance(p) < 1e-6 {
                continue;
            }
            let oracle = winding_number(p, poly.vertices()) != 0
                && winding_number(p, hole.vertices()) == 0;
            assert_eq!(point_in_polygon(p, &poly, std::slice::from_ref(&hole)), oracle, "{p:?}");
        }
    }

    #[test]
    fn self_intersection_is_found() {
        let bow = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        assert_eq!(bow.find_self_intersection(), Some((0, 2)));
        assert!(unit_square().validate_simple().is_ok());
    }

    #[test]
    fn centroid_of_rectangle() {
        let c = Polygon::rectangle(0.0, 0.0, 4.0, 2.0).centroid();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
    }
}
