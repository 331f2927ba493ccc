//! Boom section layout, flow law and on/off decisions.

mod overlap;

use thiserror::Error;

use crate::field_io::{Method, RunConfig, SectionMode};
use crate::geometry::{Point, QuadCell, SprayedArea};
use crate::planner::{LaneGrid, PathPlan, Sample, SegmentKind};

pub use overlap::{filter_overlap_grid, filter_overlap_polygon, LaneContention, OccupancyTracker};

#[derive(Debug, Error, PartialEq)]
pub enum SwitchError {
    #[error("working width {width} is not an even multiple of section width {section}")]
    Layout { width: f64, section: f64 },
    #[error("sample {index} has no usable label: {reason}")]
    Unlabeled { index: usize, reason: &'static str },
    #[error("plan was built for {0}, not M2")]
    WrongMethod(Method),
    #[error("occupancy threshold must be positive (got {0})")]
    Threshold(f64),
}

/// Boom sections: `per_side` sections of width `width` on each side.
/// Index `i` runs over -N..=-1 (left) and 1..=N (right).
#[derive(Debug, Clone, PartialEq)]
pub struct SectionLayout {
    pub per_side: usize,
    pub width: f64,
    pub mode: SectionMode,
}

impl SectionLayout {
    pub fn new(working_width: f64, width: f64, mode: SectionMode) -> Result<Self, SwitchError> {
        let err = SwitchError::Layout {
            width: working_width,
            section: width,
        };
        if !(width > 0.0 && working_width > 0.0) {
            return Err(err);
        }
        let ratio = working_width / width;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio || n < 2.0 || n % 2.0 != 0.0 {
            return Err(err);
        }
        Ok(Self {
            per_side: n as usize / 2,
            width,
            mode,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self, SwitchError> {
        Self::new(cfg.working_width, cfg.nozzle_spacing, cfg.section_mode)
    }

    pub fn working_width(&self) -> f64 {
        2.0 * self.per_side as f64 * self.width
    }

    /// Section indices left to right.
    pub fn indices(&self) -> impl Iterator<Item = i32> + '_ {
        let n = self.per_side as i32;
        (-n..=-1).chain(1..=n)
    }

    pub fn count(&self) -> usize {
        2 * self.per_side
    }

    /// Signed lateral offset of the section centre, positive to the right.
    pub fn offset(&self, i: i32) -> f64 {
        let half = if i < 0 { 0.5 } else { -0.5 };
        (i as f64 + half) * self.width
    }

    pub fn offsets(&self) -> Vec<f64> {
        self.indices().map(|i| self.offset(i)).collect()
    }

    /// Switching group of a section; groups are switched as one.
    pub fn group(&self, i: i32) -> usize {
        match self.mode {
            SectionMode::One => 0,
            SectionMode::Two => usize::from(i > 0),
            SectionMode::Multi => self.slot(i),
        }
    }

    pub fn group_count(&self) -> usize {
        match self.mode {
            SectionMode::One => 1,
            SectionMode::Two => 2,
            SectionMode::Multi => self.count(),
        }
    }

    /// Position of section `i` in `indices()`.
    pub fn slot(&self, i: i32) -> usize {
        let n = self.per_side as i32;
        if i < 0 {
            (i + n) as usize
        } else {
            (i + n - 1) as usize
        }
    }

    /// Per-section flows for one step. Single and two-block booms share one
    /// valve per block, so they apply the reference rate at `v_ref` across
    /// the whole width.
    pub fn flows(&self, v_ref: f64, yaw_rate: f64, s_ref: f64) -> Vec<f64> {
        match self.mode {
            SectionMode::Multi => {
                nominal_flows(&section_velocities(v_ref, yaw_rate, self), s_ref, self.width)
            }
            SectionMode::One | SectionMode::Two => {
                vec![s_ref / 10_000.0 * v_ref * self.width; self.count()]
            }
        }
    }

    /// Boom end points and section boundary points at a pose, left to right.
    pub fn boom_points(&self, p: Point, heading: f64) -> Vec<Point> {
        let right = Point::right_of(heading);
        let half = self.working_width() / 2.0;
        (0..=self.count())
            .map(|k| p + right * (k as f64 * self.width - half))
            .collect()
    }
}

/// Section speeds for a yaw rate, in `indices()` order.
pub fn section_velocities(v_ref: f64, yaw_rate: f64, layout: &SectionLayout) -> Vec<f64> {
    // the right side is on the outside of a counter-clockwise turn
    layout
        .indices()
        .map(|i| v_ref + layout.offset(i) * yaw_rate)
        .collect()
}

/// Nominal section flow in l/s; sections moving backwards are shut.
pub fn nominal_flows(velocities: &[f64], s_ref: f64, w: f64) -> Vec<f64> {
    velocities
        .iter()
        .map(|&v| if v < 0.0 { 0.0 } else { s_ref / 10_000.0 * v * w })
        .collect()
}

/// Reactive block state for M1: on along headland and lanes, off on
/// transitions. Within a lane the block goes off once every cell it would
/// spray has its centroid in already sprayed area.
pub fn block_state_m1(sample: &Sample, cells: &[QuadCell], sprayed: &SprayedArea) -> bool {
    match sample.kind {
        SegmentKind::Headland => true,
        SegmentKind::Transition => false,
        SegmentKind::Lane => !cells.iter().all(|c| sprayed.contains(c.centroid())),
    }
}

/// Predictive block state for M2 at step `k` (from sample `k` to `k + 1`).
/// Depends only on the plan: headland first passes are on, transitions are
/// off, and lane steps are on once any part of the boom is over the
/// mainfield.
pub fn block_state_m2(
    plan: &PathPlan,
    grid: &LaneGrid,
    layout: &SectionLayout,
    k: usize,
) -> Result<bool, SwitchError> {
    if plan.method != Method::M2 {
        return Err(SwitchError::WrongMethod(plan.method));
    }
    let (Some(a), Some(b)) = (plan.samples.get(k), plan.samples.get(k + 1)) else {
        return Err(SwitchError::Unlabeled {
            index: k,
            reason: "no following sample",
        });
    };
    match a.kind {
        SegmentKind::Headland => Ok(true),
        SegmentKind::Transition => Ok(false),
        SegmentKind::Lane => {
            if a.lane_id.is_none() {
                return Err(SwitchError::Unlabeled {
                    index: k,
                    reason: "lane step without lane id",
                });
            }
            let mut pts = layout.boom_points(a.position, a.heading);
            pts.extend(layout.boom_points(b.position, b.heading));
            Ok(pts.into_iter().any(|p| grid.in_mainfield(p)))
        }
    }
}

/// Group-level decision: a group sprays iff any member section passes.
/// `pass` is indexed like `indices()`.
pub fn group_on(layout: &SectionLayout, pass: &[bool]) -> Vec<bool> {
    let mut on = vec![false; layout.group_count()];
    for (i, &p) in layout.indices().zip(pass) {
        on[layout.group(i)] |= p;
    }
    layout.indices().map(|i| on[layout.group(i)]).collect()
}
