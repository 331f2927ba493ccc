//! Sample-by-sample spray simulation and coverage metrics.

mod metrics;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field_io::{FieldSpec, Method, RunConfig, SectionMode};
use crate::geometry::{wrap_angle, CellKind, QuadCell, SprayedArea};
use crate::planner::{
    build_lane_grid, lane_priority, plan, LaneGrid, PathPlan, PlanError, Sample, SegmentKind,
};
use crate::switching::{
    block_state_m1, block_state_m2, group_on, section_velocities, LaneContention, SectionLayout,
    SwitchError,
};

pub use metrics::{coverage_metrics, CoverageMetrics};

/// Steps of history seen by the headland filter of the one/two-block booms.
pub const HEADLAND_WINDOW: usize = 10;
/// Wedges below this area (m²) are dropped.
pub const MIN_WEDGE_AREA: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Switch(#[from] SwitchError),
    #[error("plan does not match field or config: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayCell {
    pub cell: QuadCell,
    /// Litres.
    pub applied_volume: f64,
    /// Litres per hectare.
    pub applied_rate: f64,
    /// Number of cells covering this cell's centroid, itself included.
    pub overlap_count: u8,
    pub step: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SprayMap {
    pub cells: Vec<SprayCell>,
    /// Volume dispensed per step from the flows of the open sections.
    pub step_volumes: Vec<f64>,
}

impl SprayMap {
    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.applied_volume).sum()
    }
}

/// A candidate cell of one section for one step, with the volume it would
/// receive if sprayed.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub slot: usize,
    pub cell: QuadCell,
    pub volume: f64,
}

/// Cells swept by every section between samples `a` and `b`. Sections that
/// move backwards or sweep a degenerate wedge produce nothing.
pub fn step_candidates(
    layout: &SectionLayout,
    a: &Sample,
    b: &Sample,
    v_ref: f64,
    s_ref: f64,
) -> Vec<Candidate> {
    let d = a.position.distance(b.position);
    if d <= 0.0 {
        return Vec::new();
    }
    let dt = d / v_ref;
    let pa = layout.boom_points(a.position, a.heading);
    let pb = layout.boom_points(b.position, b.heading);
    let turning = wrap_angle(b.heading - a.heading).abs() > 1e-12;
    let kind = if turning {
        CellKind::Wedge
    } else {
        CellKind::Straight
    };
    let v = section_velocities(v_ref, b.yaw_rate, layout);
    let flows = layout.flows(v_ref, b.yaw_rate, s_ref);
    layout
        .indices()
        .enumerate()
        .filter_map(|(slot, i)| {
            if v[slot] < 0.0 {
                return None;
            }
            let cell = QuadCell::new([pa[slot], pa[slot + 1], pb[slot + 1], pb[slot]], kind, i);
            if turning && (cell.area < MIN_WEDGE_AREA || !cell.is_convex()) {
                return None;
            }
            Some(Candidate {
                slot,
                cell,
                volume: flows[slot] * dt,
            })
        })
        .collect()
}

/// Per-slot pass flags from a per-cell predicate (absent slots fail).
fn pass_by_slot(
    layout: &SectionLayout,
    cands: &[Candidate],
    pred: impl Fn(&Candidate) -> bool,
) -> Vec<bool> {
    let mut pass = vec![false; layout.count()];
    for c in cands {
        pass[c.slot] = pred(c);
    }
    pass
}

/// Runs one plan through the section switching and returns the sprayed map.
pub fn simulate(
    field: &FieldSpec,
    plan: &PathPlan,
    cfg: &RunConfig,
) -> Result<(SprayMap, CoverageMetrics), SimError> {
    let grid = build_lane_grid(field, cfg)?;
    let map = spray(&grid, plan, cfg)?;
    let metrics = coverage_metrics(&map, field, plan.total_length, cfg.s_volume_ref);
    let map = metrics::with_overlap_counts(map, field);
    Ok((map, metrics))
}

fn spray(grid: &LaneGrid, plan: &PathPlan, cfg: &RunConfig) -> Result<SprayMap, SimError> {
    if plan.method != cfg.method {
        return Err(SimError::Mismatch(format!(
            "plan is {} but config asks for {}",
            plan.method, cfg.method
        )));
    }
    if plan.samples.len() < 2 {
        return Err(SimError::Mismatch("plan has fewer than two samples".into()));
    }
    let layout = SectionLayout::from_config(cfg)?;
    let multi = layout.mode == SectionMode::Multi;
    let mut recent = SprayedArea::windowed(HEADLAND_WINDOW);
    let mut all = SprayedArea::unbounded();
    let mut contention = LaneContention::new(grid, &lane_priority(grid, plan));
    let mut current_lane = None;
    let mut map = SprayMap::default();

    for k in 0..plan.samples.len() - 1 {
        let (a, b) = (&plan.samples[k], &plan.samples[k + 1]);
        let cands = step_candidates(&layout, a, b, cfg.v_ref, cfg.s_volume_ref);
        if a.kind == SegmentKind::Lane && a.lane_id != current_lane {
            if let Some(id) = a.lane_id {
                contention.mark_driven(id);
            }
        }
        current_lane = if a.kind == SegmentKind::Lane { a.lane_id } else { None };

        let open: Vec<bool> = match (a.kind, multi) {
            (SegmentKind::Transition, _) => vec![false; layout.count()],
            (SegmentKind::Headland, false) => group_on(
                &layout,
                &pass_by_slot(&layout, &cands, |c| !recent.contains(c.cell.centroid())),
            ),
            (SegmentKind::Headland, true) => {
                pass_by_slot(&layout, &cands, |c| !all.contains(c.cell.centroid()))
            }
            (SegmentKind::Lane, _) => {
                let lane = a.lane_id.ok_or(SwitchError::Unlabeled {
                    index: k,
                    reason: "lane step without lane id",
                })?;
                let block = match plan.method {
                    Method::M1 => true,
                    Method::M2 => block_state_m2(plan, grid, &layout, k)?,
                };
                if !block {
                    vec![false; layout.count()]
                } else if multi {
                    pass_by_slot(&layout, &cands, |c| {
                        let p = c.cell.centroid();
                        !all.contains(p) && !contention.yields(lane, p)
                    })
                } else if plan.method == Method::M1 {
                    // reactive: each block closes once all of its cells are sprayed
                    let mut open = vec![false; layout.count()];
                    for g in 0..layout.group_count() {
                        let cells: Vec<QuadCell> = cands
                            .iter()
                            .filter(|c| layout.group(c.cell.section_index) == g)
                            .map(|c| c.cell.clone())
                            .collect();
                        if block_state_m1(a, &cells, &all) {
                            for c in cands.iter().filter(|c| layout.group(c.cell.section_index) == g) {
                                open[c.slot] = true;
                            }
                        }
                    }
                    open
                } else {
                    vec![true; layout.count()]
                }
            }
        };

        let kept: Vec<&Candidate> = cands.iter().filter(|c| open[c.slot]).collect();
        map.step_volumes
            .push(kept.iter().map(|c| c.volume).sum::<f64>());
        for c in &kept {
            map.cells.push(SprayCell {
                cell: c.cell.clone(),
                applied_volume: c.volume,
                applied_rate: c.volume / (c.cell.area / 10_000.0),
                overlap_count: 0,
                step: k,
            });
        }
        recent.push_step(kept.iter().map(|c| c.cell.clone()));
        all.push_step(kept.iter().map(|c| c.cell.clone()));
    }
    Ok(map)
}

/// One row of the six-setup comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SetupResult {
    pub method: Method,
    pub mode: SectionMode,
    pub metrics: CoverageMetrics,
}

/// Plans both methods and simulates each with the three boom setups.
/// Rows are ordered M1 then M2, each as one, two, multi.
pub fn run_matrix(field: &FieldSpec, base: &RunConfig) -> Result<Vec<SetupResult>, SimError> {
    let maps = run_matrix_maps(field, base)?;
    Ok(maps.into_iter().map(|(r, _, _)| r).collect())
}

/// Like [`run_matrix`] but also returns each spray map and its plan.
pub fn run_matrix_maps(
    field: &FieldSpec,
    base: &RunConfig,
) -> Result<Vec<(SetupResult, SprayMap, PathPlan)>, SimError> {
    let all: Vec<(Method, SectionMode)> = Method::ALL
        .into_iter()
        .flat_map(|m| SectionMode::ALL.into_iter().map(move |s| (m, s)))
        .collect();
    run_setups(field, base, &all)
}

/// Runs the given (method, boom) setups, planning each method once.
pub fn run_setups(
    field: &FieldSpec,
    base: &RunConfig,
    setups: &[(Method, SectionMode)],
) -> Result<Vec<(SetupResult, SprayMap, PathPlan)>, SimError> {
    let grid = build_lane_grid(field, base)?;
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| setups.iter().any(|s| s.0 == *m))
        .collect();
    let plans: Vec<PathPlan> = methods
        .par_iter()
        .map(|&m| plan(field, &grid, &base.with(m, base.section_mode)))
        .collect::<Result<_, _>>()?;
    setups
        .par_iter()
        .map(|&(method, mode)| {
            let p = methods.iter().position(|&m| m == method).expect("method planned");
            let plan = &plans[p];
            let cfg = base.with(plan.method, mode);
            let map = spray(&grid, plan, &cfg)?;
            let metrics = coverage_metrics(&map, field, plan.total_length, cfg.s_volume_ref);
            let map = metrics::with_overlap_counts(map, field);
            Ok((
                SetupResult {
                    method: plan.method,
                    mode,
                    metrics,
                },
                map,
                plan.clone(),
            ))
        })
        .collect()
}
