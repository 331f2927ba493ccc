//! Route construction for both coverage patterns.
//!
//! M1 covers the whole headland first, then serpentines through the lanes
//! and returns to the entry. M2 drives the headland ring once from the entry
//! and inserts the lanes as excursions: two neighbouring lanes are driven out
//! and back with a turn at the far end, and the ring is rejoined just behind
//! the point where it was left. Ring stretches driven a second time are
//! transitions, so every headland arc is sprayed exactly once.

use super::path::{chain_length, dubins, dubins_all, Pose, Prim, Ring};
use super::{Lane, LaneGrid, PathPlan, PlanError, PlanSegment, RingSpan, SegmentKind};
use crate::field_io::{FieldSpec, Method, RunConfig};
use crate::geometry::{point_in_ring, Point};

struct Ctx<'a> {
    field: &'a FieldSpec,
    grid: &'a LaneGrid,
    r: f64,
    rings: Vec<Ring>,
}

impl<'a> Ctx<'a> {
    fn new(field: &'a FieldSpec, grid: &'a LaneGrid, cfg: &RunConfig) -> Self {
        let r = cfg.min_turn_radius;
        let mut rings = vec![Ring::filleted(&grid.headland_path, r)];
        rings.extend(grid.obstacle_paths.iter().map(|p| Ring::filleted(p, r)));
        Self {
            field,
            grid,
            r,
            rings,
        }
    }

    /// Inside the contour (or at most one turning radius outside it) and
    /// clear of every obstacle.
    fn clear(&self, prims: &[Prim]) -> bool {
        prims.iter().all(|prim| {
            let n = (prim.length().ceil() as usize).max(1);
            (0..=n).all(|k| {
                let p = prim.pose_at(prim.length() * k as f64 / n as f64).p;
                let inside = point_in_ring(p, self.field.contour.vertices())
                    || self.field.contour.boundary_distance(p) <= self.r;
                inside && !self.field.obstacles.iter().any(|o| point_in_ring(p, o.vertices()))
            })
        })
    }

    /// Shortest clear connection: a direct Dubins path, or one that detours
    /// along a headland ring in either direction.
    fn connect(&self, from: Pose, to: Pose) -> Vec<Prim> {
        let mut candidates: Vec<(Vec<Prim>, bool)> = dubins_all(from, to, self.r)
            .into_iter()
            .map(|p| (p, false))
            .collect();
        for ring in &self.rings {
            for dir in [1.0, -1.0] {
                let s1 = ring.nearest(from.p) + dir * 2.0 * self.r;
                let s2 = ring.nearest(to.p) - dir * 2.0 * self.r;
                let len = if dir > 0.0 {
                    ring.forward(s1, s2)
                } else {
                    -ring.forward(s2, s1)
                };
                let orient = |p: Pose| if dir > 0.0 { p } else { p.reversed() };
                let p1 = orient(ring.pose_at(s1));
                let p2 = orient(ring.pose_at(s1 + len));
                let mut path = dubins(from, p1, self.r);
                path.extend(ring.section(s1, len));
                path.extend(dubins(p2, to, self.r));
                candidates.push((path, true));
            }
        }
        let mut best: Option<(f64, Vec<Prim>)> = None;
        let mut fallback: Option<(f64, Vec<Prim>)> = None;
        for (path, via_ring) in candidates {
            let len = chain_length(&path);
            if best.as_ref().is_some_and(|(l, _)| *l <= len) {
                continue;
            }
            if self.clear(&path) {
                best = Some((len, path));
            } else if via_ring && fallback.as_ref().is_none_or(|(l, _)| len < *l) {
                fallback = Some((len, path));
            }
        }
        best.or(fallback).map(|(_, p)| p).unwrap_or_default()
    }
}

struct Route {
    segs: Vec<PlanSegment>,
    pose: Pose,
}

impl Route {
    fn new(pose: Pose) -> Self {
        Self {
            segs: Vec::new(),
            pose,
        }
    }

    fn push(&mut self, prims: Vec<Prim>, kind: SegmentKind, lane_id: Option<usize>) {
        for prim in prims {
            if prim.length() <= 1e-9 {
                continue;
            }
            self.pose = prim.end();
            self.segs.push(PlanSegment {
                prim,
                kind,
                lane_id,
                span: None,
            });
        }
    }

    /// Drives `len >= 0` metres of ring `k` starting at parameter `s0`.
    fn ring(&mut self, ring: &Ring, k: usize, s0: f64, len: f64, kind: SegmentKind) {
        let mut s = s0;
        for prim in ring.section(s0, len) {
            let l = prim.length();
            let span = (kind == SegmentKind::Headland).then_some(RingSpan {
                ring: k,
                start: s.rem_euclid(ring.length()),
                length: l,
            });
            s += l;
            if l <= 1e-9 {
                continue;
            }
            self.pose = prim.end();
            self.segs.push(PlanSegment {
                prim,
                kind,
                lane_id: None,
                span,
            });
        }
    }

    fn lane(&mut self, lane: &Lane, forward: bool) {
        let (a, b) = if forward {
            (lane.start, lane.end)
        } else {
            (lane.end, lane.start)
        };
        self.push(vec![Prim::Line { a, b }], SegmentKind::Lane, Some(lane.id));
    }
}

fn lane_entry(lane: &Lane, forward: bool) -> Pose {
    let prim = if forward {
        Prim::Line {
            a: lane.start,
            b: lane.end,
        }
    } else {
        Prim::Line {
            a: lane.end,
            b: lane.start,
        }
    };
    prim.start()
}

fn lane_exit(lane: &Lane, forward: bool) -> Pose {
    let pose = lane_entry(lane, forward);
    Pose::new(if forward { lane.end } else { lane.start }, pose.heading)
}

/// Groups lanes into runs of consecutive rows where each lane overlaps
/// exactly one lane of the next row along the grid direction.
pub(crate) fn clusters(grid: &LaneGrid) -> Vec<Vec<usize>> {
    let u = Point::from_heading(grid.direction);
    let extent = |l: &Lane| (l.start.dot(u), l.end.dot(u));
    let overlaps = |a: &Lane, b: &Lane| {
        let (a0, a1) = extent(a);
        let (b0, b1) = extent(b);
        a0 < b1 && b0 < a1
    };
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    let rows = grid.lanes.iter().map(|l| l.row).max().unwrap_or(0);
    for row in 1..=rows {
        let lanes: Vec<&Lane> = grid.lanes.iter().filter(|l| l.row == row).collect();
        let prev: Vec<&Lane> = grid.lanes.iter().filter(|l| l.row + 1 == row).collect();
        let mut next_open = Vec::new();
        for lane in &lanes {
            let above: Vec<&&Lane> = prev.iter().filter(|p| overlaps(p, lane)).collect();
            let continues = above.len() == 1
                && lanes.iter().filter(|l| overlaps(above[0], l)).count() == 1;
            let target = if continues {
                open.iter()
                    .copied()
                    .find(|&c| out[c].last() == Some(&above[0].id))
            } else {
                None
            };
            let c = match target {
                Some(c) => c,
                None => {
                    out.push(Vec::new());
                    out.len() - 1
                }
            };
            out[c].push(lane.id);
            next_open.push(c);
        }
        open = next_open;
    }
    out
}

fn ring_lengths(ctx: &Ctx) -> Vec<f64> {
    ctx.rings.iter().map(Ring::length).collect()
}

pub fn plan(field: &FieldSpec, grid: &LaneGrid, cfg: &RunConfig) -> Result<PathPlan, PlanError> {
    match cfg.method {
        Method::M1 => plan_m1(field, grid, cfg),
        Method::M2 => plan_m2(field, grid, cfg),
    }
}

pub fn plan_m1(field: &FieldSpec, grid: &LaneGrid, cfg: &RunConfig) -> Result<PathPlan, PlanError> {
    let ctx = Ctx::new(field, grid, cfg);
    let outer = &ctx.rings[0];
    let s_entry = outer.nearest(field.entry);
    let home = outer.pose_at(s_entry);
    let mut route = Route::new(home);
    route.ring(outer, 0, s_entry, outer.length(), SegmentKind::Headland);

    let mut obstacles: Vec<usize> = (1..ctx.rings.len()).collect();
    while !obstacles.is_empty() {
        let here = route.pose.p;
        let (idx, &k) = obstacles
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = ctx.rings[*a.1].pose_at(ctx.rings[*a.1].nearest(here)).p.distance(here);
                let db = ctx.rings[*b.1].pose_at(ctx.rings[*b.1].nearest(here)).p.distance(here);
                da.total_cmp(&db)
            })
            .unwrap();
        obstacles.remove(idx);
        let ring = &ctx.rings[k];
        let s = ring.nearest(here);
        route.push(ctx.connect(route.pose, ring.pose_at(s)), SegmentKind::Transition, None);
        route.ring(ring, k, s, ring.length(), SegmentKind::Headland);
    }

    let mut todo = clusters(grid);
    while !todo.is_empty() {
        // pick the cluster, end row and direction closest to the current pose
        let mut best: Option<(f64, usize, bool, bool)> = None;
        for (ci, cl) in todo.iter().enumerate() {
            for reverse_rows in [false, true] {
                let first = if reverse_rows { *cl.last().unwrap() } else { cl[0] };
                for forward in [true, false] {
                    let target = lane_entry(grid.lane(first), forward);
                    let len = chain_length(&dubins(route.pose, target, ctx.r));
                    if best.is_none_or(|b| len < b.0) {
                        best = Some((len, ci, reverse_rows, forward));
                    }
                }
            }
        }
        let (_, ci, reverse_rows, mut forward) = best.unwrap();
        let mut cl = todo.remove(ci);
        if reverse_rows {
            cl.reverse();
        }
        for id in cl {
            let lane = grid.lane(id);
            let conn = ctx.connect(route.pose, lane_entry(lane, forward));
            route.push(conn, SegmentKind::Transition, None);
            route.lane(lane, forward);
            forward = !forward;
        }
    }
    route.push(ctx.connect(route.pose, home), SegmentKind::Transition, None);
    Ok(PathPlan::from_segments(Method::M1, route.segs, ring_lengths(&ctx), cfg))
}

#[derive(Debug, Clone, Copy)]
struct Attach {
    ring: usize,
    s: f64,
}

#[derive(Debug, Clone)]
enum Body {
    /// Out on `out`, back on `back`; the flags say whether each lane is
    /// driven from its start point.
    Pair {
        out: (usize, bool),
        back: (usize, bool),
    },
    Single { lane: usize, forward: bool },
    Ring { k: usize },
}

#[derive(Debug, Clone)]
struct Excursion {
    /// Forward offsets from the ring's loop start.
    leave: f64,
    rejoin: f64,
    body: Body,
}

fn nearest_ring(ctx: &Ctx, p: Point) -> Attach {
    ctx.rings
        .iter()
        .enumerate()
        .map(|(k, ring)| {
            let s = ring.nearest(p);
            (ring.pose_at(s).p.distance(p), Attach { ring: k, s })
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, a)| a)
        .unwrap()
}

pub fn plan_m2(field: &FieldSpec, grid: &LaneGrid, cfg: &RunConfig) -> Result<PathPlan, PlanError> {
    if grid.lanes.len() <= 1 {
        // no second lane to pair with: the pattern degenerates to M1
        let mut p = plan_m1(field, grid, cfg)?;
        p.method = Method::M2;
        return Ok(p);
    }
    let ctx = Ctx::new(field, grid, cfg);
    let outer = &ctx.rings[0];
    let mut starts = vec![outer.nearest(field.entry)];
    let mut per_ring: Vec<Vec<Excursion>> = vec![Vec::new(); ctx.rings.len()];

    // obstacle rings hang off the outer ring at their closest point
    for k in 1..ctx.rings.len() {
        let c = grid.obstacle_paths[k - 1].centroid();
        let s0 = outer.nearest(c);
        starts.push(ctx.rings[k].nearest(outer.pose_at(s0).p));
        let f = outer.forward(starts[0], s0);
        per_ring[0].push(Excursion {
            leave: f,
            rejoin: f,
            body: Body::Ring { k },
        });
    }

    let attach: Vec<[Attach; 2]> = grid
        .lanes
        .iter()
        .map(|l| [nearest_ring(&ctx, l.start), nearest_ring(&ctx, l.end)])
        .collect();
    let offset = |a: Attach| ctx.rings[a.ring].forward(starts[a.ring], a.s);

    for cl in clusters(grid) {
        let mut i = 0;
        while i < cl.len() {
            let a = cl[i];
            let mut paired = false;
            if i + 1 < cl.len() {
                let b = cl[i + 1];
                let la = grid.lane(a).length();
                let lb = grid.lane(b).length();
                let mut best: Option<(f64, usize)> = None;
                for (side, (&ea, &eb)) in attach[a - 1].iter().zip(&attach[b - 1]).enumerate() {
                    if ea.ring != eb.ring {
                        continue;
                    }
                    let gap = (offset(ea) - offset(eb)).abs();
                    if gap < 0.5 * la.min(lb) && best.is_none_or(|x| gap < x.0) {
                        best = Some((gap, side));
                    }
                }
                if let Some((_, side)) = best {
                    let (fa, fb) = (offset(attach[a - 1][side]), offset(attach[b - 1][side]));
                    let (later, earlier) = if fa >= fb { (a, b) } else { (b, a) };
                    // side 0 attaches at the lane start, so leaving drives forward
                    let out_fwd = side == 0;
                    per_ring[attach[a - 1][side].ring].push(Excursion {
                        leave: fa.max(fb),
                        rejoin: fa.min(fb),
                        body: Body::Pair {
                            out: (later, out_fwd),
                            back: (earlier, !out_fwd),
                        },
                    });
                    paired = true;
                    i += 2;
                }
            }
            if !paired {
                let side = if attach[a - 1][0].ring == 0 || attach[a - 1][1].ring != 0 {
                    0
                } else {
                    1
                };
                let e = attach[a - 1][side];
                per_ring[e.ring].push(Excursion {
                    leave: offset(e),
                    rejoin: offset(e),
                    body: Body::Single {
                        lane: a,
                        forward: side == 0,
                    },
                });
                i += 1;
            }
        }
    }

    let mut route = Route::new(outer.pose_at(starts[0]));
    walk_ring(&ctx, &mut route, 0, &starts, &mut per_ring);
    Ok(PathPlan::from_segments(Method::M2, route.segs, ring_lengths(&ctx), cfg))
}

/// Drives ring `k` once from its start, inserting its excursions.
fn walk_ring(
    ctx: &Ctx,
    route: &mut Route,
    k: usize,
    starts: &[f64],
    per_ring: &mut [Vec<Excursion>],
) {
    let ring = &ctx.rings[k];
    let st = starts[k];
    let total = ring.length();
    let r = ctx.r;
    let mut excursions = std::mem::take(&mut per_ring[k]);
    excursions.sort_by(|a, b| a.leave.total_cmp(&b.leave));

    let mut cur = 0.0;
    let mut frontier = 0.0;
    let drive = |route: &mut Route, from: f64, to: f64, frontier: f64| {
        let dup_end = to.min(frontier);
        if dup_end > from {
            route.ring(ring, k, st + from, dup_end - from, SegmentKind::Transition);
        }
        let on_start = from.max(frontier);
        if to > on_start {
            route.ring(ring, k, st + on_start, to - on_start, SegmentKind::Headland);
        }
    };
    let best_leave = |node: f64, cur: f64, target: Pose| -> f64 {
        (0..=10)
            .map(|j| node - 4.0 * r + 0.5 * r * j as f64)
            .filter(|&f| f >= cur && f <= total)
            .map(|f| {
                let len = chain_length(&dubins(ring.pose_at(st + f), target, r));
                (f - node + len, f)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, f)| f)
            .unwrap_or(cur.max(node.min(total)))
    };
    let best_rejoin = |node: f64, limit: f64, from: Pose| -> f64 {
        (0..=10)
            .map(|j| node - r + 0.5 * r * j as f64)
            .filter(|&f| f >= 0.0 && f <= limit)
            .map(|f| {
                let len = chain_length(&dubins(from, ring.pose_at(st + f), r));
                (len - (f - node), f)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, f)| f)
            .unwrap_or(limit.min(node.max(0.0)))
    };

    for ex in excursions {
        match ex.body {
            Body::Ring { k: child } => {
                let leave = ex.leave.max(cur);
                drive(route, cur, leave, frontier);
                frontier = f64::max(frontier, leave);
                let child_ring = &ctx.rings[child];
                let entry = child_ring.pose_at(starts[child]);
                route.push(ctx.connect(route.pose, entry), SegmentKind::Transition, None);
                walk_ring(ctx, route, child, starts, per_ring);
                let back = ring.pose_at(st + leave);
                route.push(ctx.connect(route.pose, back), SegmentKind::Transition, None);
                cur = leave;
            }
            Body::Pair { out, back } => {
                let out_lane = ctx.grid.lane(out.0);
                let back_lane = ctx.grid.lane(back.0);
                let leave = best_leave(ex.leave, cur, lane_entry(out_lane, out.1));
                drive(route, cur, leave, frontier);
                frontier = f64::max(frontier, leave);
                route.push(
                    dubins(route.pose, lane_entry(out_lane, out.1), r),
                    SegmentKind::Transition,
                    None,
                );
                route.lane(out_lane, out.1);
                let turn = ctx.connect(route.pose, lane_entry(back_lane, back.1));
                route.push(turn, SegmentKind::Transition, None);
                route.lane(back_lane, back.1);
                let rejoin = best_rejoin(ex.rejoin, leave, route.pose);
                route.push(
                    dubins(route.pose, ring.pose_at(st + rejoin), r),
                    SegmentKind::Transition,
                    None,
                );
                cur = rejoin;
            }
            Body::Single { lane, forward } => {
                let l = ctx.grid.lane(lane);
                let leave = best_leave(ex.leave, cur, lane_entry(l, forward));
                drive(route, cur, leave, frontier);
                frontier = f64::max(frontier, leave);
                route.push(
                    dubins(route.pose, lane_entry(l, forward), r),
                    SegmentKind::Transition,
                    None,
                );
                route.lane(l, forward);
                let exit = lane_exit(l, forward);
                let rejoin = best_rejoin(ex.rejoin, leave, exit);
                let back = ctx.connect(route.pose, ring.pose_at(st + rejoin));
                route.push(back, SegmentKind::Transition, None);
                cur = rejoin;
            }
        }
    }
    drive(route, cur, total, frontier);
}
