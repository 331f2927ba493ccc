use serde::Serialize;

use super::PlanError;
use crate::field_io::{FieldSpec, RunConfig};
use crate::geometry::{offset_inward, offset_left, point_in_polygon, Point, Polygon};

/// A straight mainfield lane, oriented along the grid direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lane {
    /// 1-based, ordered by row and then along the row.
    pub id: usize,
    pub row: usize,
    pub start: Point,
    pub end: Point,
}

impl Lane {
    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }
}

#[derive(Debug, Clone)]
pub struct LaneGrid {
    pub working_width: f64,
    /// Single headland pass, W/2 inside the contour (CCW).
    pub headland_path: Polygon,
    /// Headland passes around obstacles, W/2 outside each one (CW).
    pub obstacle_paths: Vec<Polygon>,
    /// Contour offset by W; this ring is the intersection line.
    pub mainfield_boundary: Polygon,
    /// Obstacles grown by W (CW).
    pub mainfield_holes: Vec<Polygon>,
    /// Lane heading in radians.
    pub direction: f64,
    pub row_count: usize,
    pub lanes: Vec<Lane>,
}

impl LaneGrid {
    pub fn intersection_line(&self) -> &Polygon {
        &self.mainfield_boundary
    }

    pub fn in_mainfield(&self, p: Point) -> bool {
        point_in_polygon(p, &self.mainfield_boundary, &self.mainfield_holes)
    }

    pub fn lane(&self, id: usize) -> &Lane {
        &self.lanes[id - 1]
    }
}

fn longest_edge_heading(poly: &Polygon) -> f64 {
    // first of equally long edges wins, so the choice is stable
    let (a, b) = poly
        .edges()
        .reduce(|best, e| {
            if e.0.distance(e.1) > best.0.distance(best.1) + 1e-9 {
                e
            } else {
                best
            }
        })
        .expect("polygon has edges");
    (b.y - a.y).atan2(b.x - a.x)
}

/// Crossing parameters of the line `{p : p.n = s}` with a ring, sorted.
fn crossings(ring: &Polygon, u: Point, n: Point, s: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = ring
        .edges()
        .filter_map(|(a, b)| {
            let da = a.dot(n) - s;
            let db = b.dot(n) - s;
            ((da > 0.0) != (db > 0.0)).then(|| {
                let p = a + (b - a) * (da / (da - db));
                p.dot(u)
            })
        })
        .collect();
    ts.sort_by(f64::total_cmp);
    ts
}

fn pairs(ts: &[f64]) -> Vec<(f64, f64)> {
    ts.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

fn subtract(base: Vec<(f64, f64)>, cut: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = base;
    for &(c0, c1) in cut {
        out = out
            .into_iter()
            .flat_map(|(a, b)| {
                let mut v = Vec::with_capacity(2);
                if c1 <= a || c0 >= b {
                    v.push((a, b));
                } else {
                    if c0 > a {
                        v.push((a, c0));
                    }
                    if c1 < b {
                        v.push((c1, b));
                    }
                }
                v
            })
            .collect();
    }
    out
}

fn merge(mut iv: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    iv.retain(|(a, b)| b - a > 1e-9);
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        match out.last_mut() {
            Some(last) if a <= last.1 + 1e-9 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Row offsets along the normal: first row W/2 inside, constant spacing W,
/// the last row pulled back so it overlaps its neighbour instead of
/// leaving the boom hanging past the mainfield.
pub(crate) fn row_offsets(smin: f64, smax: f64, w: f64) -> Vec<f64> {
    let width = smax - smin;
    if width <= w {
        return vec![0.5 * (smin + smax)];
    }
    let count = (width / w - 1e-9).ceil() as usize;
    (0..count)
        .map(|k| (smin + w / 2.0 + k as f64 * w).min(smax - w / 2.0))
        .collect()
}

pub fn build_lane_grid(field: &FieldSpec, cfg: &RunConfig) -> Result<LaneGrid, PlanError> {
    let w = cfg.working_width;
    let too_small = |_| PlanError::FieldTooSmall(field.id.clone());
    let headland_path = offset_inward(&field.contour, w / 2.0).map_err(too_small)?;
    let mainfield = offset_inward(&field.contour, w).map_err(too_small)?;
    let obstacle_paths = field
        .obstacles
        .iter()
        .map(|o| offset_left(o, w / 2.0))
        .collect::<Result<Vec<_>, _>>()?;
    let holes = field
        .obstacles
        .iter()
        .map(|o| offset_left(o, w))
        .collect::<Result<Vec<_>, _>>()?;

    let direction = longest_edge_heading(&field.contour);
    let u = Point::from_heading(direction);
    let n = Point::new(-u.y, u.x);
    let (smin, smax) = mainfield
        .vertices()
        .iter()
        .map(|v| v.dot(n))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s), hi.max(s))
        });
    let rows = row_offsets(smin, smax, w);

    let region = |s: f64| -> Vec<(f64, f64)> {
        let outer = pairs(&crossings(&mainfield, u, n, s));
        let cut: Vec<(f64, f64)> = holes
            .iter()
            .flat_map(|h| pairs(&crossings(h, u, n, s)))
            .collect();
        subtract(outer, &cut)
    };
    let ring_vertices: Vec<f64> = std::iter::once(&mainfield)
        .chain(holes.iter())
        .flat_map(|r| r.vertices().iter().map(|v| v.dot(n)))
        .collect();

    let mut lanes = Vec::new();
    let half = w / 2.0 - 1e-7;
    for (row, &s) in rows.iter().enumerate() {
        // the boom strip meets the mainfield wherever any of these lines does
        let mut lines = vec![s - half, s, s + half];
        lines.extend(ring_vertices.iter().copied().filter(|v| (v - s).abs() < half));
        let pieces = merge(lines.into_iter().flat_map(region).collect());
        for (t0, t1) in pieces {
            if t1 - t0 < 1e-3 {
                continue;
            }
            lanes.push(Lane {
                id: lanes.len() + 1,
                row: row + 1,
                start: u * t0 + n * s,
                end: u * t1 + n * s,
            });
        }
    }
    if lanes.is_empty() {
        return Err(PlanError::FieldTooSmall(field.id.clone()));
    }
    Ok(LaneGrid {
        working_width: w,
        headland_path,
        obstacle_paths,
        mainfield_boundary: mainfield,
        mainfield_holes: holes,
        direction,
        row_count: rows.len(),
        lanes,
    })
}
