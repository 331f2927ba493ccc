//! Fixed-resolution count grids used for coverage metrics and as a test oracle.

use super::{Point, Polygon, QuadCell};

/// Saturating per-pixel counter over an axis-aligned window. Pixel `(i, j)`
/// is sampled at its centre.
#[derive(Debug, Clone)]
pub struct CountGrid {
    origin: Point,
    res: f64,
    nx: usize,
    ny: usize,
    counts: Vec<u8>,
}

impl CountGrid {
    pub fn new(lo: Point, hi: Point, res: f64) -> Self {
        assert!(res > 0.0, "raster resolution must be positive");
        let nx = ((hi.x - lo.x) / res).ceil().max(1.0) as usize;
        let ny = ((hi.y - lo.y) / res).ceil().max(1.0) as usize;
        Self {
            origin: lo,
            res,
            nx,
            ny,
            counts: vec![0; nx * ny],
        }
    }

    /// Grid with explicit pixel counts, so adjacent bands tile exactly.
    pub fn with_dims(origin: Point, res: f64, nx: usize, ny: usize) -> Self {
        assert!(res > 0.0, "raster resolution must be positive");
        Self {
            origin,
            res,
            nx,
            ny,
            counts: vec![0; nx * ny],
        }
    }

    /// Count of the pixel containing `p`, if inside the grid.
    pub fn count_at(&self, p: Point) -> Option<u8> {
        let i = ((p.x - self.origin.x) / self.res).floor();
        let j = ((p.y - self.origin.y) / self.res).floor();
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some(self.counts[j as usize * self.nx + i as usize])
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.res
    }

    pub fn pixel_area(&self) -> f64 {
        self.res * self.res
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    fn row_y(&self, j: usize) -> f64 {
        self.origin.y + (j as f64 + 0.5) * self.res
    }

    /// Pixel columns whose centres fall in `[x0, x1]`.
    fn cols(&self, x0: f64, x1: f64) -> std::ops::Range<usize> {
        let a = ((x0 - self.origin.x) / self.res - 0.5).ceil().max(0.0) as usize;
        let b = ((x1 - self.origin.x) / self.res - 0.5).floor() + 1.0;
        let b = (b.max(0.0) as usize).min(self.nx);
        a.min(b)..b
    }

    fn rows(&self, y0: f64, y1: f64) -> std::ops::Range<usize> {
        let a = ((y0 - self.origin.y) / self.res - 0.5).ceil().max(0.0) as usize;
        let b = ((y1 - self.origin.y) / self.res - 0.5).floor() + 1.0;
        let b = (b.max(0.0) as usize).min(self.ny);
        a.min(b)..b
    }

    /// Adds one to every pixel whose centre lies in the convex quad.
    pub fn add_quad(&mut self, cell: &QuadCell) {
        let (lo, hi) = cell.bbox();
        for j in self.rows(lo.y, hi.y) {
            let y = self.row_y(j);
            if let Some((x0, x1)) = horizontal_extent(&cell.corners, y) {
                for i in self.cols(x0, x1) {
                    let c = &mut self.counts[j * self.nx + i];
                    *c = c.saturating_add(1);
                }
            }
        }
    }

    /// Boolean mask of pixels inside `outer` and outside every hole
    /// (even-odd scanline fill).
    pub fn polygon_mask(&self, outer: &Polygon, holes: &[Polygon]) -> Vec<bool> {
        let mut mask = vec![false; self.nx * self.ny];
        let rings: Vec<&Polygon> = std::iter::once(outer).chain(holes.iter()).collect();
        let mut xs = Vec::new();
        for j in 0..self.ny {
            let y = self.row_y(j);
            xs.clear();
            for ring in &rings {
                for (a, b) in ring.edges() {
                    if (a.y > y) != (b.y > y) {
                        xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                for i in self.cols(pair[0], pair[1]) {
                    mask[j * self.nx + i] = true;
                }
            }
        }
        mask
    }

    /// Area of pixels with `pred(count)` true, restricted to `mask` if given.
    pub fn area_where(&self, mask: Option<&[bool]>, pred: impl Fn(u8) -> bool) -> f64 {
        let n = match mask {
            Some(m) => self
                .counts
                .iter()
                .zip(m)
                .filter(|(c, &m)| m && pred(**c))
                .count(),
            None => self.counts.iter().filter(|c| pred(**c)).count(),
        };
        n as f64 * self.pixel_area()
    }
}

fn horizontal_extent(ring: &[Point], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = ring.len();
    for k in 0..n {
        let a = ring[k];
        let b = ring[(k + 1) % n];
        if (a.y <= y && y <= b.y) || (b.y <= y && y <= a.y) {
            if (b.y - a.y).abs() < 1e-15 {
                lo = lo.min(a.x.min(b.x));
                hi = hi.max(a.x.max(b.x));
            } else {
                let x = a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (hi >= lo).then_some((lo, hi))
}

/// Brute-force area of the union of quads by pixel-centre sampling.
pub fn raster_union_area(cells: &[QuadCell], res: f64) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    let pts: Vec<Point> = cells.iter().flat_map(|c| c.corners).collect();
    let (lo, hi) = super::bbox_of(&pts);
    let mut g = CountGrid::new(lo, hi, res);
    for c in cells {
        g.add_quad(c);
    }
    g.area_where(None, |c| c > 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{point_in_polygon, CellKind};

    #[test]
    fn quad_fill_matches_area() {
        let c = QuadCell::new(
            [
                Point::new(0.0, 0.0),
                Point::new(4.0, 1.0),
                Point::new(3.0, 5.0),
                Point::new(-1.0, 3.0),
            ],
            CellKind::Wedge,
            1,
        );
        let a = raster_union_area(std::slice::from_ref(&c), 0.01);
        assert!((a - c.area).abs() / c.area < 0.005, "{a} vs {}", c.area);
    }

    #[test]
    fn mask_agrees_with_point_in_polygon() {
        let outer = Polygon::rectangle(0.0, 0.0, 10.0, 8.0);
        let hole = Polygon::rectangle(3.0, 3.0, 5.0, 6.0);
        let g = CountGrid::new(Point::new(-1.0, -1.0), Point::new(11.0, 9.0), 0.25);
        let mask = g.polygon_mask(&outer, std::slice::from_ref(&hole));
        let (nx, ny) = g.dims();
        for j in 0..ny {
            for i in 0..nx {
                let p = Point::new(-1.0 + (i as f64 + 0.5) * 0.25, -1.0 + (j as f64 + 0.5) * 0.25);
                assert_eq!(mask[j * nx + i], point_in_polygon(p, &outer, std::slice::from_ref(&hole)));
            }
        }
    }
}
