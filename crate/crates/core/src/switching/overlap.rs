use std::collections::HashMap;

use super::SwitchError;
use crate::geometry::{CellKind, Point, QuadCell, SprayedArea};
use crate::planner::LaneGrid;

/// Keeps the cells whose centroid is not yet sprayed. The caller adds the
/// kept cells to `state` afterwards.
pub fn filter_overlap_polygon(cells: Vec<QuadCell>, state: &SprayedArea) -> Vec<QuadCell> {
    cells
        .into_iter()
        .filter(|c| !state.contains(c.centroid()))
        .collect()
}

/// Sprayed-cell centroids on a hash grid with buckets of `d_g / 2`.
#[derive(Debug, Clone)]
pub struct OccupancyTracker {
    d_g: f64,
    buckets: HashMap<(i64, i64), Vec<Point>>,
}

impl OccupancyTracker {
    pub fn new(d_g: f64) -> Result<Self, SwitchError> {
        if !(d_g > 0.0 && d_g.is_finite()) {
            return Err(SwitchError::Threshold(d_g));
        }
        Ok(Self {
            d_g,
            buckets: HashMap::new(),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.d_g
    }

    fn key(&self, p: Point) -> (i64, i64) {
        let s = self.d_g / 2.0;
        ((p.x / s).floor() as i64, (p.y / s).floor() as i64)
    }

    /// True if a recorded centroid lies within `d_g` of `p`.
    pub fn near(&self, p: Point) -> bool {
        let (kx, ky) = self.key(p);
        (-2..=2).any(|dx| {
            (-2..=2).any(|dy| {
                self.buckets
                    .get(&(kx + dx, ky + dy))
                    .is_some_and(|v| v.iter().any(|q| q.distance(p) <= self.d_g))
            })
        })
    }

    pub fn record(&mut self, p: Point) {
        self.buckets.entry(self.key(p)).or_default().push(p);
    }

    pub fn len(&self) -> usize {
        self.buckets.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }
}

/// Drops cells whose centroid is within `d_g` of an earlier sprayed
/// centroid, then records the survivors. Cells of one step are compared
/// against earlier steps only.
pub fn filter_overlap_grid(cells: Vec<QuadCell>, tracker: &mut OccupancyTracker) -> Vec<QuadCell> {
    let kept: Vec<QuadCell> = cells
        .into_iter()
        .filter(|c| !tracker.near(c.centroid()))
        .collect();
    for c in &kept {
        tracker.record(c.centroid());
    }
    kept
}

/// Lane swaths for priority contention: a lane yields to any lane of higher
/// priority that has not been driven yet and whose swath covers the cell.
#[derive(Debug, Clone)]
pub struct LaneContention {
    swaths: Vec<QuadCell>,
    /// Rank by lane id (index id - 1); lower rank wins.
    rank: Vec<usize>,
    driven: Vec<bool>,
}

impl LaneContention {
    /// `priority` lists lane ids best first.
    pub fn new(grid: &LaneGrid, priority: &[usize]) -> Self {
        let half = grid.working_width / 2.0;
        let swaths = grid
            .lanes
            .iter()
            .map(|l| {
                let heading = (l.end - l.start).y.atan2((l.end - l.start).x);
                let r = Point::right_of(heading) * half;
                QuadCell::new(
                    [l.start - r, l.end - r, l.end + r, l.start + r],
                    CellKind::Straight,
                    1,
                )
            })
            .collect();
        let mut rank = vec![usize::MAX; grid.lanes.len()];
        for (pos, &id) in priority.iter().enumerate() {
            rank[id - 1] = pos;
        }
        Self {
            swaths,
            rank,
            driven: vec![false; grid.lanes.len()],
        }
    }

    pub fn mark_driven(&mut self, lane: usize) {
        self.driven[lane - 1] = true;
    }

    pub fn yields(&self, lane: usize, p: Point) -> bool {
        let mine = self.rank[lane - 1];
        self.swaths.iter().enumerate().any(|(j, s)| {
            j + 1 != lane && !self.driven[j] && self.rank[j] < mine && s.contains(p)
        })
    }
}
