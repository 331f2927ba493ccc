use std::collections::HashMap;

use super::{segments_intersect, line_intersection, Point, QuadCell};

const BUCKET: f64 = 2.0;

/// Union of the cells sprayed during the most recent `window` sampling
/// steps, or of all cells when no window is set. Stored as a multi-polygon
/// of quads; holes left by spray gaps are represented implicitly.
#[derive(Debug, Clone, Default)]
pub struct SprayedArea {
    window: Option<usize>,
    cells: Vec<(usize, QuadCell)>,
    buckets: HashMap<(i64, i64), Vec<usize>>,
    steps: usize,
}

impl SprayedArea {
    pub fn windowed(window: usize) -> Self {
        Self {
            window: Some(window),
            ..Self::default()
        }
    }

    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    /// Number of steps pushed so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Appends the kept cells of one sampling step. An empty step still
    /// advances the window.
    pub fn push_step<I: IntoIterator<Item = QuadCell>>(&mut self, cells: I) {
        let step = self.steps;
        for cell in cells {
            let id = self.cells.len();
            let (lo, hi) = cell.bbox();
            for key in bucket_range(lo, hi) {
                self.buckets.entry(key).or_default().push(id);
            }
            self.cells.push((step, cell));
        }
        self.steps += 1;
        self.evict();
    }

    fn first_alive_step(&self) -> usize {
        match self.window {
            Some(w) => self.steps.saturating_sub(w),
            None => 0,
        }
    }

    fn evict(&mut self) {
        // Compact once the dead prefix dominates, keeping memory bounded.
        let Some(_) = self.window else { return };
        let first = self.first_alive_step();
        let dead = self.cells.iter().take_while(|(s, _)| *s < first).count();
        if dead > 0 && dead * 2 > self.cells.len() {
            let alive: Vec<_> = self.cells.drain(dead..).collect();
            self.cells.clear();
            self.buckets.clear();
            for (step, cell) in alive {
                let id = self.cells.len();
                let (lo, hi) = cell.bbox();
                for key in bucket_range(lo, hi) {
                    self.buckets.entry(key).or_default().push(id);
                }
                self.cells.push((step, cell));
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let first = self.first_alive_step();
        let key = bucket_of(p);
        self.buckets.get(&key).is_some_and(|ids| {
            ids.iter().any(|&id| {
                let (step, cell) = &self.cells[id];
                *step >= first && cell.contains(p)
            })
        })
    }

    pub fn alive_cells(&self) -> impl Iterator<Item = &QuadCell> + '_ {
        let first = self.first_alive_step();
        self.cells
            .iter()
            .filter(move |(s, _)| *s >= first)
            .map(|(_, c)| c)
    }

    pub fn is_empty(&self) -> bool {
        self.alive_cells().next().is_none()
    }

    /// Exact area of the current union.
    pub fn area(&self) -> f64 {
        let cells: Vec<QuadCell> = self.alive_cells().cloned().collect();
        union_area(&cells)
    }
}

fn bucket_of(p: Point) -> (i64, i64) {
    ((p.x / BUCKET).floor() as i64, (p.y / BUCKET).floor() as i64)
}

fn bucket_range(lo: Point, hi: Point) -> impl Iterator<Item = (i64, i64)> {
    let (x0, y0) = bucket_of(Point::new(lo.x - 1e-9, lo.y - 1e-9));
    let (x1, y1) = bucket_of(Point::new(hi.x + 1e-9, hi.y + 1e-9));
    (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
}

/// Exact area of a union of convex quads by vertical slab decomposition.
///
/// Slab boundaries are placed at every vertex abscissa and every pairwise
/// edge crossing, so inside a slab each cell's vertical extent changes
/// linearly and the union length is linear too; evaluating it at the slab
/// midpoint integrates it exactly.
pub fn union_area(cells: &[QuadCell]) -> f64 {
    if cells.is_empty() {
        return 0.0;
    }
    let boxes: Vec<(Point, Point)> = cells.iter().map(|c| c.bbox()).collect();
    let mut xs: Vec<f64> = cells
        .iter()
        .flat_map(|c| c.corners.iter().map(|p| p.x))
        .collect();
    for i in 0..cells.len() {
        for j in (i + 1)..cells.len() {
            let (a0, a1) = boxes[i];
            let (b0, b1) = boxes[j];
            if a1.x < b0.x || b1.x < a0.x || a1.y < b0.y || b1.y < a0.y {
                continue;
            }
            for ei in 0..4 {
                let p = cells[i].corners[ei];
                let q = cells[i].corners[(ei + 1) % 4];
                for ej in 0..4 {
                    let r = cells[j].corners[ej];
                    let s = cells[j].corners[(ej + 1) % 4];
                    if segments_intersect(p, q, r, s) {
                        if let Some(x) = line_intersection(p, q - p, r, s - r) {
                            xs.push(x.x);
                        }
                    }
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0.x.total_cmp(&boxes[b].0.x));

    let mut total = 0.0;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 <= 0.0 {
            continue;
        }
        let xm = 0.5 * (x0 + x1);
        intervals.clear();
        for &i in &order {
            if boxes[i].0.x > xm {
                break;
            }
            if boxes[i].1.x < xm {
                continue;
            }
            if let Some(iv) = vertical_extent(&cells[i], xm) {
                intervals.push(iv);
            }
        }
        total += union_length(&mut intervals) * (x1 - x0);
    }
    total
}

fn vertical_extent(cell: &QuadCell, x: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..4 {
        let a = cell.corners[i];
        let b = cell.corners[(i + 1) % 4];
        if (a.x <= x && x <= b.x) || (b.x <= x && x <= a.x) {
            let y = if (b.x - a.x).abs() < 1e-15 {
                lo = lo.min(a.y.min(b.y));
                hi = hi.max(a.y.max(b.y));
                continue;
            } else {
                a.y + (x - a.x) / (b.x - a.x) * (b.y - a.y)
            };
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    (hi > lo).then_some((lo, hi))
}

fn union_length(iv: &mut [(f64, f64)]) -> f64 {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for &(a, b) in iv.iter() {
        match cur {
            Some((s, e)) if a <= e => cur = Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    total
}
