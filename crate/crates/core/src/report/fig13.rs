//! Small serpentine used to compare centroid-distance filtering on an
//! occupancy grid with filtering against the sprayed polygon.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::field_io::{FieldSpec, Method, RunConfig, SectionMode};
use crate::geometry::raster::CountGrid;
use crate::geometry::{bbox_of, Point, Polygon, QuadCell, SprayedArea};
use crate::planner::{PathPlan, PlanSegment, Prim, SegmentKind};
use crate::simulator::{step_candidates, SprayCell, SprayMap};
use crate::switching::{filter_overlap_grid, filter_overlap_polygon, OccupancyTracker, SectionLayout};

pub const WIDTH: f64 = 3.0;
pub const SECTION: f64 = 0.5;
pub const LANE_LENGTH: f64 = 10.0;
pub const LANES: usize = 4;
/// Turn radius; lanes are `2 * RADIUS` apart, so neighbours share one section width.
pub const RADIUS: f64 = 1.25;
/// Half a section width.
pub const SPACING: f64 = 0.25;
pub const RESOLUTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Filter {
    None,
    Grid(f64),
    Polygon,
}

impl Filter {
    pub fn label(&self) -> String {
        match self {
            Filter::None => "unfiltered".into(),
            Filter::Grid(d) => format!("grid_{d}"),
            Filter::Polygon => "polygon".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Variant {
    pub filter: Filter,
    pub kept: Vec<SprayCell>,
    pub gap_area: f64,
    pub overlap_area: f64,
    pub swath_area: f64,
}

fn scenario_config() -> RunConfig {
    RunConfig {
        working_width: WIDTH,
        nozzle_spacing: SECTION,
        section_mode: SectionMode::Multi,
        sample_spacing: SPACING,
        min_turn_radius: RADIUS,
        ..RunConfig::default()
    }
}

/// Serpentine of straight lanes joined by half-turns, alternating left and
/// right.
pub fn scenario_plan() -> PathPlan {
    serpentine(SPACING)
}

fn serpentine(ds: f64) -> PathPlan {
    let mut segs = Vec::new();
    let mut push = |prim| {
        segs.push(PlanSegment {
            prim,
            kind: SegmentKind::Headland,
            lane_id: None,
            span: None,
        })
    };
    for k in 0..LANES {
        let y = 2.0 * RADIUS * k as f64;
        let (x0, x1) = if k % 2 == 0 { (0.0, LANE_LENGTH) } else { (LANE_LENGTH, 0.0) };
        push(Prim::Line {
            a: Point::new(x0, y),
            b: Point::new(x1, y),
        });
        if k + 1 < LANES {
            let sweep = if k % 2 == 0 { PI } else { -PI };
            push(Prim::Arc {
                c: Point::new(x1, y + RADIUS),
                r: RADIUS,
                a0: -PI / 2.0,
                sweep,
            });
        }
    }
    let cfg = RunConfig { sample_spacing: ds, ..scenario_config() };
    PathPlan::from_segments(Method::M1, segs, Vec::new(), &cfg)
}

/// Runs one filter over the serpentine and measures it against the swept
/// swath on a 0.01 m raster.
pub fn run_variant(filter: Filter) -> Variant {
    run_on(filter, &scenario_plan())
}

fn run_on(filter: Filter, plan: &PathPlan) -> Variant {
    let cfg = scenario_config();
    let layout = SectionLayout::from_config(&cfg).expect("scenario layout is valid");
    let mut state = SprayedArea::unbounded();
    let mut tracker = match filter {
        Filter::Grid(d) => Some(OccupancyTracker::new(d).expect("positive threshold")),
        _ => None,
    };
    let mut swath: Vec<QuadCell> = Vec::new();
    let mut kept = Vec::new();
    for (k, w) in plan.samples.windows(2).enumerate() {
        let cands = step_candidates(&layout, &w[0], &w[1], cfg.v_ref, cfg.s_volume_ref);
        swath.extend(cands.iter().map(|c| c.cell.clone()));
        let cells: Vec<QuadCell> = cands.iter().map(|c| c.cell.clone()).collect();
        let survivors = match (filter, tracker.as_mut()) {
            (Filter::Grid(_), Some(t)) => filter_overlap_grid(cells, t),
            (Filter::Polygon, _) => filter_overlap_polygon(cells, &state),
            _ => cells,
        };
        state.push_step(survivors.iter().cloned());
        for cell in survivors {
            let c = cands
                .iter()
                .find(|c| c.cell.section_index == cell.section_index)
                .expect("survivor comes from the candidates");
            kept.push(SprayCell {
                applied_volume: c.volume,
                applied_rate: c.volume / (cell.area / 10_000.0),
                cell,
                overlap_count: 1,
                step: k,
            });
        }
    }
    let pts: Vec<Point> = swath.iter().flat_map(|c| c.corners).collect();
    let (lo, hi) = bbox_of(&pts);
    let mut all = CountGrid::new(lo, hi, RESOLUTION);
    let mut got = CountGrid::new(lo, hi, RESOLUTION);
    swath.iter().for_each(|c| all.add_quad(c));
    kept.iter().for_each(|c| got.add_quad(&c.cell));
    let px = all.pixel_area();
    let (mut gap, mut overlap, mut area) = (0usize, 0usize, 0usize);
    for (&a, &g) in all.counts().iter().zip(got.counts()) {
        area += usize::from(a > 0);
        gap += usize::from(a > 0 && g == 0);
        overlap += usize::from(g >= 2);
    }
    Variant {
        filter,
        kept,
        gap_area: gap as f64 * px,
        overlap_area: overlap as f64 * px,
        swath_area: area as f64 * px,
    }
}

/// Grid variants for each threshold followed by the polygon variant.
pub fn run_all(thresholds: &[f64]) -> Vec<Variant> {
    let mut filters: Vec<Filter> = thresholds.iter().map(|&d| Filter::Grid(d)).collect();
    filters.push(Filter::Polygon);
    filters.into_iter().map(run_variant).collect()
}

pub fn variants_csv(variants: &[Variant]) -> String {
    let mut out = String::from("variant,d_G,gap_m2,overlap_m2,swath_m2,gap_pct,overlap_pct\n");
    for v in variants {
        let d = match v.filter {
            Filter::Grid(d) => d.to_string(),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            v.filter.label(),
            d,
            v.gap_area,
            v.overlap_area,
            v.swath_area,
            100.0 * v.gap_area / v.swath_area,
            100.0 * v.overlap_area / v.swath_area
        );
    }
    out
}

/// A rectangle around the swath, standing in for a field when drawing.
pub fn scenario_field() -> FieldSpec {
    let m = WIDTH / 2.0 + RADIUS;
    let top = 2.0 * RADIUS * (LANES - 1) as f64;
    let rect = Polygon::rectangle(-m, -m, LANE_LENGTH + m, top + m);
    FieldSpec::new("fig13", rect, Vec::new(), Point::new(-m, -m)).expect("rectangle is valid")
}

pub fn variant_map(v: &Variant) -> SprayMap {
    SprayMap {
        step_volumes: Vec::new(),
        cells: v.kept.clone(),
    }
}

pub fn scenario_s_ref() -> f64 {
    scenario_config().s_volume_ref
}
