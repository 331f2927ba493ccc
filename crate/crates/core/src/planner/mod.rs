//! Lane grids and the two coverage path patterns.

mod grid;
pub mod path;
mod route;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::field_io::{Method, RunConfig};
use crate::geometry::{wrap_angle, GeometryError, Point};

pub use grid::{build_lane_grid, Lane, LaneGrid};
pub use path::{Pose, Prim};
pub use route::{plan, plan_m1, plan_m2};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("field {0} too small for headland")]
    FieldTooSmall(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SegmentKind {
    Headland,
    Lane,
    Transition,
}

impl SegmentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SegmentKind::Headland => "headland",
            SegmentKind::Lane => "lane",
            SegmentKind::Transition => "transition",
        }
    }
}

/// Part of a headland ring traversed while spraying.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpan {
    /// 0 for the outer headland, `k` for obstacle `k - 1`.
    pub ring: usize,
    pub start: f64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSegment {
    pub prim: Prim,
    pub kind: SegmentKind,
    pub lane_id: Option<usize>,
    pub span: Option<RingSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub position: Point,
    pub heading: f64,
    /// At `v_ref`; zero for the first sample.
    pub yaw_rate: f64,
    /// Label of the step starting at this sample.
    pub kind: SegmentKind,
    pub lane_id: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct PathPlan {
    pub method: Method,
    pub segments: Vec<PlanSegment>,
    pub samples: Vec<Sample>,
    pub total_length: f64,
    /// Length of each of the ring loops (outer first).
    pub ring_lengths: Vec<f64>,
}

impl PathPlan {
    /// Samples the segments at `cfg.sample_spacing`; also used for scripted paths.
    pub fn from_segments(
        method: Method,
        segments: Vec<PlanSegment>,
        ring_lengths: Vec<f64>,
        cfg: &RunConfig,
    ) -> Self {
        let samples = sample_segments(&segments, cfg.sample_spacing, cfg.v_ref);
        let total_length = segments.iter().map(|s| s.prim.length()).sum();
        Self {
            method,
            segments,
            samples,
            total_length,
            ring_lengths,
        }
    }

    /// Samples as CSV: x, y, heading, yaw_rate, segment_kind, lane_id.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,heading,yaw_rate,segment_kind,lane_id\n");
        for s in &self.samples {
            let lane = s.lane_id.map(|l| l.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{:.4},{:.4},{:.6},{:.6},{},{}",
                s.position.x,
                s.position.y,
                s.heading,
                s.yaw_rate,
                s.kind.as_str(),
                lane
            );
        }
        out
    }
}

/// Uniform arc-length sampling at the spacing closest to `ds` that divides
/// the total length. Each step takes the label of the segment holding its
/// midpoint.
fn sample_segments(segments: &[PlanSegment], ds: f64, v_ref: f64) -> Vec<Sample> {
    let total: f64 = segments.iter().map(|s| s.prim.length()).sum();
    let steps = ((total / ds).round() as usize).max(1);
    let h = total / steps as f64;
    let mut ends = Vec::with_capacity(segments.len());
    let mut acc = 0.0;
    for s in segments {
        acc += s.prim.length();
        ends.push(acc);
    }
    let locate = |s: f64, from: usize| -> (usize, f64) {
        let mut k = from;
        while k + 1 < segments.len() && ends[k] < s {
            k += 1;
        }
        let start = ends[k] - segments[k].prim.length();
        (k, (s - start).clamp(0.0, segments[k].prim.length()))
    };

    let mut out: Vec<Sample> = Vec::with_capacity(steps + 1);
    let (mut kp, mut km) = (0, 0);
    for i in 0..=steps {
        let s = i as f64 * h;
        let (k, local) = locate(s, kp);
        kp = k;
        let pose = segments[k].prim.pose_at(local);
        let (kind, lane_id) = match (i < steps, out.last()) {
            (false, Some(prev)) => (prev.kind, prev.lane_id),
            _ => {
                let (m, _) = locate((s + 0.5 * h).min(total), km);
                km = m;
                (segments[m].kind, segments[m].lane_id)
            }
        };
        let yaw_rate = match out.last() {
            Some(prev) => {
                let d = prev.position.distance(pose.p);
                if d > 0.0 {
                    wrap_angle(pose.heading - prev.heading) * v_ref / d
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        out.push(Sample {
            position: pose.p,
            heading: pose.heading,
            yaw_rate,
            kind,
            lane_id,
        });
    }
    out
}

/// Lane ids sorted by the heading change accumulated while driving each
/// lane, smallest first; ties go to the lower id.
pub fn lane_priority(grid: &LaneGrid, plan: &PathPlan) -> Vec<usize> {
    let mut turning = vec![0.0; grid.lanes.len() + 1];
    for w in plan.samples.windows(2) {
        if let (Some(a), Some(b)) = (w[0].lane_id, w[1].lane_id) {
            if a == b && w[0].kind == SegmentKind::Lane {
                turning[a] += wrap_angle(w[1].heading - w[0].heading).abs();
            }
        }
    }
    priority_order(&turning[1..])
}

/// Ordering of 1-based ids by accumulated heading change.
pub fn priority_order(turning: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (1..=turning.len()).collect();
    ids.sort_by(|&a, &b| turning[a - 1].total_cmp(&turning[b - 1]).then(a.cmp(&b)));
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priority_sorts_by_turning_then_id() {
        assert_eq!(priority_order(&[0.0, 0.1, 0.05]), vec![1, 3, 2]);
        assert_eq!(priority_order(&[0.0, 0.0]), vec![1, 2]);
        assert_eq!(priority_order(&[0.3, 0.0]), vec![2, 1]);
    }
}
