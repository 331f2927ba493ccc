use super::{line_intersection, ring_signed_area, GeometryError, Point, Polygon};

/// Mitre joins longer than this multiple of the offset distance are bevelled.
const MITRE_LIMIT: f64 = 2.0;

#[derive(Clone, Copy)]
struct OffsetLine {
    /// Index of the source edge; its start vertex is `ring[src]`.
    src: usize,
    origin: Point,
    dir: Point,
}

/// Offsets a counter-clockwise ring inward by `d` using mitred joins
/// (bevelled past the mitre limit). Edges that shrink to nothing are
/// dropped and their neighbours re-joined.
pub fn offset_inward(poly: &Polygon, d: f64) -> Result<Polygon, GeometryError> {
    let ccw = poly.to_ccw();
    let out = offset_left(&ccw, d)?;
    let a_in = ccw.signed_area();
    let a_out = out.signed_area();
    if !(a_out > 0.0 && a_out < a_in) {
        return Err(GeometryError::OffsetCollapsed { distance: d });
    }
    Ok(out)
}

/// Offsets every edge of `ring` by `d` to its left. For a CCW ring this
/// shrinks the region, for a CW hole ring it grows the hole.
pub(crate) fn offset_left(ring: &Polygon, d: f64) -> Result<Polygon, GeometryError> {
    let verts = dedup(ring.vertices());
    let n = verts.len();
    if n < 3 {
        return Err(GeometryError::Degenerate(n));
    }
    let mut lines: Vec<OffsetLine> = (0..n)
        .map(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let dir = (b - a) * (1.0 / a.distance(b));
            let left = Point::new(-dir.y, dir.x);
            OffsetLine { src: i, origin: a + left * d, dir }
        })
        .collect();

    loop {
        if lines.len() < 3 {
            return Err(GeometryError::OffsetCollapsed { distance: d });
        }
        let m = lines.len();
        let joins: Vec<Vec<Point>> = (0..m)
            .map(|k| join(&verts, &lines[k], &lines[(k + 1) % m], d))
            .collect::<Option<_>>()
            .ok_or(GeometryError::OffsetCollapsed { distance: d })?;
        // edge k runs from the last point of joins[k-1] to the first of joins[k]
        let mut worst: Option<(usize, f64)> = None;
        for k in 0..m {
            let start = *joins[(k + m - 1) % m].last().unwrap();
            let end = joins[k][0];
            let along = (end - start).dot(lines[k].dir);
            if along <= 1e-12 && worst.is_none_or(|(_, w)| along < w) {
                worst = Some((k, along));
            }
        }
        match worst {
            Some((k, _)) => {
                lines.remove(k);
            }
            None => {
                let out: Vec<Point> = joins.into_iter().flatten().collect();
                if ring_signed_area(&out).signum() != ring_signed_area(&verts).signum() {
                    return Err(GeometryError::OffsetCollapsed { distance: d });
                }
                let poly = Polygon::new(out)?;
                if poly.find_self_intersection().is_some() {
                    return Err(GeometryError::OffsetCollapsed { distance: d });
                }
                return Ok(poly);
            }
        }
    }
}

fn join(verts: &[Point], a: &OffsetLine, b: &OffsetLine, d: f64) -> Option<Vec<Point>> {
    let n = verts.len();
    let turn = a.dir.cross(b.dir);
    let adjacent = (a.src + 1) % n == b.src;
    if turn.abs() < 1e-12 {
        if a.dir.dot(b.dir) < 0.0 {
            return None;
        }
        // collinear continuation
        return Some(vec![b.origin]);
    }
    let p = line_intersection(a.origin, a.dir, b.origin, b.dir)?;
    if turn < 0.0 && adjacent {
        let v = verts[b.src];
        if p.distance(v) > MITRE_LIMIT * d.abs() {
            let na = Point::new(-a.dir.y, a.dir.x);
            let nb = Point::new(-b.dir.y, b.dir.x);
            return Some(vec![v + na * d, v + nb * d]);
        }
    }
    Some(vec![p])
}

fn dedup(points: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points {
        if out.last().is_none_or(|q| q.distance(p) > 1e-9) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].distance(*out.last().unwrap()) <= 1e-9 {
        out.pop();
    }
    // drop collinear vertices
    let mut changed = true;
    while changed && out.len() > 3 {
        changed = false;
        let n = out.len();
        for i in 0..n {
            let a = out[(i + n - 1) % n];
            let b = out[i];
            let c = out[(i + 1) % n];
            let u = b - a;
            let v = c - b;
            if u.cross(v).abs() <= 1e-12 * u.norm() * v.norm() && u.dot(v) > 0.0 {
                out.remove(i);
                changed = true;
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area;

    #[test]
    fn square_offset_is_analytic() {
        let sq = Polygon::rectangle(0.0, 0.0, 100.0, 100.0);
        let inner = offset_inward(&sq, 24.0).unwrap();
        assert!((polygon_area(&inner) - 2704.0).abs() < 1e-9);
        let (lo, hi) = inner.bbox();
        assert!((lo.x - 24.0).abs() < 1e-12 && (hi.y - 76.0).abs() < 1e-12);
    }

    #[test]
    fn offset_past_inradius_errors() {
        let sq = Polygon::rectangle(0.0, 0.0, 100.0, 100.0);
        assert!(matches!(
            offset_inward(&sq, 51.0),
            Err(GeometryError::OffsetCollapsed { .. })
        ));
    }

    #[test]
    fn hexagon_offset_keeps_distance() {
        let hex = Polygon::new(
            (0..6)
                .map(|k| {
                    let a = k as f64 * std::f64::consts::PI / 3.0 + 0.2;
                    Point::new(60.0 * a.cos(), 45.0 * a.sin())
                })
                .collect(),
        )
        .unwrap();
        let inner = offset_inward(&hex, 10.0).unwrap();
        for &v in inner.vertices() {
            assert!(hex.boundary_distance(v) >= 10.0 - 1e-6);
        }
        assert!(polygon_area(&inner) < polygon_area(&hex));
    }

    #[test]
    fn short_edge_collapses_and_is_removed() {
        // pentagon with a 2 m chamfer at one corner
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(98.0, 0.0),
            Point::new(100.0, 2.0),
            Point::new(100.0, 80.0),
            Point::new(0.0, 80.0),
        ])
        .unwrap();
        let inner = offset_inward(&p, 12.0).unwrap();
        assert_eq!(inner.len(), 4);
        for &v in inner.vertices() {
            assert!(p.boundary_distance(v) >= 12.0 - 1e-6);
        }
    }

    #[test]
    fn l_shape_reflex_corner_offsets() {
        let l = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(200.0, 0.0),
            Point::new(200.0, 100.0),
            Point::new(100.0, 100.0),
            Point::new(100.0, 200.0),
            Point::new(0.0, 200.0),
        ])
        .unwrap();
        let inner = offset_inward(&l, 24.0).unwrap();
        assert!(inner.find_self_intersection().is_none());
        for &v in inner.vertices() {
            assert!(l.boundary_distance(v) >= 24.0 - 1e-6);
        }
    }

    #[test]
    fn hole_grows_when_offset_left() {
        let hole = Polygon::rectangle(40.0, 40.0, 60.0, 60.0).to_cw();
        let grown = offset_left(&hole, 5.0).unwrap();
        assert!(grown.signed_area() < 0.0);
        assert!(polygon_area(&grown).abs() > 400.0);
    }
}
