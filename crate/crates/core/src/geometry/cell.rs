use serde::{Deserialize, Serialize};

use super::{bbox_of, point_segment_distance, ring_signed_area, Point, BOUNDARY_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    /// Rectangle swept on a step without heading change; area is `d * w`.
    Straight,
    /// Quad joining the boom boundary points of two samples whose headings differ.
    Wedge,
}

/// One section's sprayed footprint between two consecutive samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadCell {
    pub corners: [Point; 4],
    pub area: f64,
    pub kind: CellKind,
    /// Negative = left of the path, positive = right; never zero.
    pub section_index: i32,
}

impl QuadCell {
    pub fn new(corners: [Point; 4], kind: CellKind, section_index: i32) -> Self {
        let area = ring_signed_area(&corners).abs();
        Self {
            corners,
            area,
            kind,
            section_index,
        }
    }

    /// Vertex average; equals the area centroid for parallelograms and is
    /// within the cell for every convex quad.
    pub fn centroid(&self) -> Point {
        let s = self
            .corners
            .iter()
            .fold(Point::default(), |acc, &p| acc + p);
        s * 0.25
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox_of(&self.corners)
    }

    /// Containment for convex quads of either orientation, boundary inclusive.
    pub fn contains(&self, p: Point) -> bool {
        let (lo, hi) = self.bbox();
        if p.x < lo.x - BOUNDARY_EPS
            || p.x > hi.x + BOUNDARY_EPS
            || p.y < lo.y - BOUNDARY_EPS
            || p.y > hi.y + BOUNDARY_EPS
        {
            return false;
        }
        let sign = ring_signed_area(&self.corners).signum();
        for i in 0..4 {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let c = (b - a).cross(p - a) * sign;
            if c < 0.0 && point_segment_distance(p, a, b) > BOUNDARY_EPS {
                return false;
            }
        }
        true
    }

    /// True when the four corners form a convex, non-self-intersecting quad.
    pub fn is_convex(&self) -> bool {
        let mut pos = false;
        let mut neg = false;
        for i in 0..4 {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let c = self.corners[(i + 2) % 4];
            let z = (b - a).cross(c - b);
            if z > 1e-12 {
                pos = true;
            } else if z < -1e-12 {
                neg = true;
            }
        }
        !(pos && neg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_cell_area_and_membership() {
        let c = QuadCell::new(
            [
                Point::new(0.0, 0.0),
                Point::new(0.0, -0.5),
                Point::new(1.0, -0.5),
                Point::new(1.0, 0.0),
            ],
            CellKind::Straight,
            1,
        );
        assert!((c.area - 0.5).abs() < 1e-12);
        assert!(c.contains(c.centroid()));
        assert!(c.contains(Point::new(1.0, 0.0)));
        assert!(!c.contains(Point::new(1.1, 0.0)));
        assert!(c.is_convex());
    }
}
