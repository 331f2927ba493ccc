//! One test per acceptance criterion; each prints a PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use spraysim::economics::{breakeven_volume, cost_delta, cost_table, CostGrid, CostParams};
use spraysim::field_io::synth::{generate_fields, FieldKind};
use spraysim::field_io::{FieldSpec, Method, RunConfig, SectionMode};
use spraysim::geometry::{union_area, Point, Polygon, QuadCell};
use spraysim::planner::path::Prim;
use spraysim::planner::{build_lane_grid, PathPlan, PlanSegment, SegmentKind};
use spraysim::report::fig13::{self, Filter};
use spraysim::simulator::{run_matrix_maps, simulate, SetupResult, SprayMap};

/// Writes past the test harness capture so every verdict shows in the log.
fn verdict(n: u32, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stdout().lock(), "criterion {n}: {status} ({detail})");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Payback years as printed: 40 rows of two chemical costs, ordered savings,
// price, area, chemical cost.
const TABLE: [[f64; 20]; 4] = [
    [
        74.2, 219.7, 22.3, 65.9, 7.4, 22.0, 3.7, 11.0, 2.2, 6.6, //
        148.4, 439.3, 44.5, 131.8, 14.8, 43.9, 7.4, 22.0, 4.5, 13.2,
    ],
    [
        82.6, 244.7, 24.8, 73.4, 8.3, 24.5, 4.1, 12.2, 2.5, 7.3, //
        165.2, 489.3, 49.6, 146.8, 16.5, 48.9, 8.3, 24.5, 5.0, 14.7,
    ],
    [
        61.3, 181.6, 18.4, 54.5, 6.1, 18.2, 3.1, 9.1, 1.8, 5.4, //
        122.6, 363.2, 36.8, 109.0, 12.3, 36.3, 6.1, 18.2, 3.7, 10.9,
    ],
    [
        73.8, 218.5, 22.1, 65.5, 7.4, 21.8, 3.7, 10.9, 2.2, 6.5, //
        147.6, 437.0, 44.3, 131.1, 14.8, 43.7, 7.4, 21.8, 4.4, 13.1,
    ],
];

#[test]
fn criterion_1_payback_table() {
    let t0 = Instant::now();
    let rows = cost_table(&CostGrid::default(), &CostParams::default());
    let elapsed = t0.elapsed();
    let expected: Vec<f64> = TABLE.iter().flatten().copied().collect();
    assert_eq!(rows.len(), expected.len());
    let mut bad = Vec::new();
    for (r, &want) in rows.iter().zip(&expected) {
        let got = r.years.expect("positive savings pay back");
        if (got - want).abs() > 0.05 {
            bad.push(format!(
                "dS={} dK={} A={} C={}: {got:.3} vs {want}",
                r.delta_s_per_ha, r.delta_k, r.a_total, r.c_chemical
            ));
        }
    }
    let pass = bad.is_empty() && elapsed < Duration::from_secs(1);
    verdict(
        1,
        pass,
        &format!(
            "{}/{} within 0.05 y, {elapsed:?}; off: {}",
            expected.len() - bad.len(),
            expected.len(),
            bad.join("; ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_breakeven_volumes() {
    let mut parts = Vec::new();
    let mut pass = true;
    for (c, printed) in [(30.0, 331_000.0), (10.0, 981_000.0)] {
        let p = CostParams {
            c_chemical: c,
            ..CostParams::default()
        };
        let v = breakeven_volume(&p).unwrap();
        // mixture price by hand: 1% chemical, 99% water at 0.002
        let oracle = 100_000.0 / (0.01 * c + 0.99 * 0.002);
        pass &= rel(v, oracle) < 1e-12 && rel(v, printed) <= 0.005;
        parts.push(format!("{v:.0} l vs {printed:.0}"));
    }
    verdict(2, pass, &parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_3_field_runs() {
    // mean per-field savings of the many-section boom over the single block
    let delta_s = 89.9 - 6.9;
    let mut parts = Vec::new();
    let mut pass = true;
    for (c, printed) in [(30.0, 3988.0), (10.0, 11819.0)] {
        let p = CostParams {
            c_chemical: c,
            ..CostParams::default()
        };
        let runs = (p.delta_k / cost_delta(delta_s, &p)).round();
        pass &= rel(runs, printed) <= 0.005;
        parts.push(format!("{runs} vs {printed}"));
    }
    verdict(3, pass, &parts.join(", "));
    assert!(pass);
}

struct FieldRun {
    kind: FieldKind,
    field: FieldSpec,
    rows: usize,
    results: Vec<SetupResult>,
    elapsed: Duration,
}

impl FieldRun {
    fn s(&self, m: Method, mode: SectionMode) -> f64 {
        self.get(m, mode).metrics.s
    }

    fn get(&self, m: Method, mode: SectionMode) -> &SetupResult {
        self.results
            .iter()
            .find(|r| r.method == m && r.mode == mode)
            .expect("all six setups run")
    }
}

const SYNTH_FIELDS: usize = 6;
const SYNTH_SEED: u64 = 2024;

fn synthetic_runs() -> &'static [FieldRun] {
    static RUNS: OnceLock<Vec<FieldRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let cfg = RunConfig::default();
        generate_fields(SYNTH_FIELDS, SYNTH_SEED)
            .into_iter()
            .map(|(kind, field)| {
                let rows = build_lane_grid(&field, &cfg).unwrap().row_count;
                let t0 = Instant::now();
                let results = run_matrix_maps(&field, &cfg)
                    .unwrap()
                    .into_iter()
                    .map(|r| r.0)
                    .collect();
                FieldRun {
                    kind,
                    field,
                    rows,
                    results,
                    elapsed: t0.elapsed(),
                }
            })
            .collect()
    })
}

#[test]
fn criterion_4_volume_structure() {
    let runs = synthetic_runs();
    assert!(runs.len() >= 5);
    let mut pass = true;
    let mut parts = Vec::new();
    for r in runs {
        for m in Method::ALL {
            let (s1, s2, s48) = (
                r.s(m, SectionMode::One),
                r.s(m, SectionMode::Two),
                r.s(m, SectionMode::Multi),
            );
            pass &= s48 <= s2 && s2 <= s1;
            let s_ref = r.get(m, SectionMode::Multi).metrics.s_field_ref;
            let dev = 100.0 * (s48 - s_ref).abs() / s_ref;
            if r.kind.is_convex() {
                pass &= dev <= 8.0;
            }
            parts.push(format!("{} {m}: {s1:.1}/{s2:.1}/{s48:.1} ref {s_ref:.1} ({dev:.2}%)", r.field.id));
        }
        pass &= r.elapsed < Duration::from_secs(30);
        parts.push(format!("{} took {:.1?}", r.field.id, r.elapsed));
    }
    verdict(4, pass, &parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_5_m2_shorter_on_convex_fields() {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut checked = 0;
    for r in synthetic_runs().iter().filter(|r| r.kind.is_convex() && r.rows >= 4) {
        let l1 = r.get(Method::M1, SectionMode::Multi).metrics.path_length;
        let l2 = r.get(Method::M2, SectionMode::Multi).metrics.path_length;
        pass &= l2 < l1;
        checked += 1;
        parts.push(format!("{} ({} lanes): {:+.2}%", r.field.id, r.rows, 100.0 * (l2 - l1) / l1));
    }
    pass &= checked > 0;
    verdict(5, pass, &parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_6_grid_versus_polygon_filter() {
    let grids = [0.5, 0.25, 0.125];
    let all = fig13::run_all(&grids);
    let (grid, poly) = all.split_at(grids.len());
    let poly = &poly[0];
    assert_eq!(poly.filter, Filter::Polygon);
    let coarse_gap = grid[0].gap_area > 0.0;
    let fine_overlap = grid[2].overlap_area > 0.0;
    let poly_gap = poly.gap_area < 0.001 * poly.swath_area;
    let poly_overlap = grid.iter().all(|g| poly.overlap_area < g.overlap_area);
    let detail: Vec<String> = all
        .iter()
        .map(|v| format!("{} gap {:.4} overlap {:.4}", v.filter.label(), v.gap_area, v.overlap_area))
        .collect();
    let pass = coarse_gap && fine_overlap && poly_gap && poly_overlap;
    verdict(
        6,
        pass,
        &format!(
            "coarse gap {coarse_gap}, fine overlap {fine_overlap}, polygon gap {poly_gap}, \
             polygon overlap below all grids {poly_overlap}; {}",
            detail.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_gaps_below_half_percent() {
    let mut worst = (0.0, String::new());
    for r in synthetic_runs() {
        for s in &r.results {
            let pct = 100.0 * s.metrics.gap_area / r.field.area_m2();
            if pct > worst.0 {
                worst = (pct, format!("{} {} {:?}", r.field.id, s.method, s.mode));
            }
        }
    }
    let pass = worst.0 < 0.5;
    verdict(9, pass, &format!("largest gap {:.3}% of field area at {}", worst.0, worst.1));
    assert!(pass);
}

fn scripted_config() -> RunConfig {
    RunConfig {
        working_width: 6.0,
        nozzle_spacing: 0.5,
        sample_spacing: 0.5,
        min_turn_radius: 4.0,
        ..RunConfig::default()
    }
}

fn scripted(prims: Vec<Prim>, bounds: [f64; 4]) -> (FieldSpec, PathPlan) {
    let segs = prims
        .into_iter()
        .map(|prim| PlanSegment {
            prim,
            kind: SegmentKind::Headland,
            lane_id: None,
            span: None,
        })
        .collect();
    let plan = PathPlan::from_segments(Method::M1, segs, Vec::new(), &scripted_config());
    let [x0, y0, x1, y1] = bounds;
    let field = FieldSpec::new("scripted", Polygon::rectangle(x0, y0, x1, y1), Vec::new(), Point::new(x0, y0))
        .unwrap();
    (field, plan)
}

fn line(ax: f64, ay: f64, bx: f64, by: f64) -> Prim {
    Prim::Line {
        a: Point::new(ax, ay),
        b: Point::new(bx, by),
    }
}

fn scenarios() -> Vec<(&'static str, FieldSpec, PathPlan)> {
    let r = 4.0;
    let straight = scripted(vec![line(0.0, 0.0, 40.0, 0.0)], [-10.0, -10.0, 50.0, 10.0]);
    let turn = scripted(
        vec![
            line(0.0, 0.0, 20.0, 0.0),
            Prim::Arc {
                c: Point::new(20.0, r),
                r,
                a0: -PI / 2.0,
                sweep: PI / 2.0,
            },
            line(20.0 + r, r, 20.0 + r, 24.0),
        ],
        [-10.0, -10.0, 34.0, 34.0],
    );
    let mut prims = Vec::new();
    for k in 0..3 {
        let y = 2.0 * r * k as f64;
        let (a, b) = if k % 2 == 0 { (0.0, 30.0) } else { (30.0, 0.0) };
        prims.push(line(a, y, b, y));
        if k < 2 {
            prims.push(Prim::Arc {
                c: Point::new(b, y + r),
                r,
                a0: -PI / 2.0,
                sweep: if k % 2 == 0 { PI } else { -PI },
            });
        }
    }
    let serpentine = scripted(prims, [-10.0, -10.0, 44.0, 26.0]);
    vec![
        ("straight lane", straight.0, straight.1),
        ("90 degree turn", turn.0, turn.1),
        ("serpentine", serpentine.0, serpentine.1),
    ]
}

/// Counts 1 cm pixels whose centre lies in at least one convex cell.
fn raster_oracle(cells: &[QuadCell]) -> f64 {
    const RES: f64 = 0.01;
    let pts: Vec<Point> = cells.iter().flat_map(|c| c.corners).collect();
    let lo_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let lo_y = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let hi_x = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let hi_y = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let nx = ((hi_x - lo_x) / RES).ceil() as usize + 1;
    let ny = ((hi_y - lo_y) / RES).ceil() as usize + 1;
    let mut hit = vec![false; nx * ny];
    for c in cells {
        let q = c.corners;
        let side = |p: Point| -> bool {
            let s: Vec<f64> = (0..4)
                .map(|i| {
                    let (a, b) = (q[i], q[(i + 1) % 4]);
                    (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)
                })
                .collect();
            s.iter().all(|&v| v >= 0.0) || s.iter().all(|&v| v <= 0.0)
        };
        let cx0 = q.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let cx1 = q.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let cy0 = q.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let cy1 = q.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let i0 = ((cx0 - lo_x) / RES).floor() as usize;
        let i1 = (((cx1 - lo_x) / RES).ceil() as usize).min(nx - 1);
        let j0 = ((cy0 - lo_y) / RES).floor() as usize;
        let j1 = (((cy1 - lo_y) / RES).ceil() as usize).min(ny - 1);
        for j in j0..=j1 {
            for i in i0..=i1 {
                let p = Point::new(lo_x + (i as f64 + 0.5) * RES, lo_y + (j as f64 + 0.5) * RES);
                if !hit[j * nx + i] && side(p) {
                    hit[j * nx + i] = true;
                }
            }
        }
    }
    hit.iter().filter(|&&h| h).count() as f64 * RES * RES
}

#[test]
fn criterion_7_union_matches_raster() {
    let cfg = scripted_config();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, field, plan) in scenarios() {
        let (map, _) = simulate(&field, &plan, &cfg).unwrap();
        let cells: Vec<QuadCell> = map.cells.iter().map(|c| c.cell.clone()).collect();
        let exact = union_area(&cells);
        let raster = raster_oracle(&cells);
        let err = rel(exact, raster);
        pass &= err <= 0.01;
        parts.push(format!("{name}: {exact:.3} vs {raster:.3} m2 ({:.3}%)", 100.0 * err));
    }
    verdict(7, pass, &parts.join(", "));
    assert!(pass);
}

fn volumes(map: &SprayMap) -> (f64, f64) {
    (map.total_volume(), map.step_volumes.iter().sum())
}

#[test]
fn criterion_8_invariants() {
    use spraysim::field_io::synth::rectangle_field;
    use spraysim::geometry::CellKind;
    use spraysim::planner::plan;

    let field = rectangle_field("inv", 220.0, 160.0);
    let base = RunConfig::default();
    let grid = build_lane_grid(&field, &base).unwrap();
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let mut closure = true;
    let mut conserved = true;
    let mut deterministic = true;
    let mut scaling = true;
    let mut monotone = true;
    for m in Method::ALL {
        let p = plan(&field, &grid, &base.with(m, SectionMode::Multi)).unwrap();
        let mut s = Vec::new();
        for mode in SectionMode::ALL {
            let cfg = base.with(m, mode);
            let (map, _) = simulate(&field, &p, &cfg).unwrap();
            if mode == SectionMode::Multi {
                closure &= map
                    .cells
                    .iter()
                    .filter(|c| c.cell.kind == CellKind::Straight)
                    .all(|c| (c.applied_rate - cfg.s_volume_ref).abs() <= 1e-6);
            }
            let (cells, dispensed) = volumes(&map);
            conserved &= rel(cells, dispensed) <= 1e-9;

            let (again, _) = simulate(&field, &p, &cfg).unwrap();
            deterministic &= again.cells == map.cells
                && again.total_volume().to_bits() == map.total_volume().to_bits();

            let doubled = RunConfig {
                s_volume_ref: 2.0 * cfg.s_volume_ref,
                ..cfg.clone()
            };
            let (twice, _) = simulate(&field, &p, &doubled).unwrap();
            scaling &= rel(twice.total_volume(), 2.0 * map.total_volume()) <= 1e-9;
            s.push(map.total_volume());
        }
        monotone &= s[2] <= s[1] && s[1] <= s[0];
    }
    checks.push(("closure", closure));
    checks.push(("conservation", conserved));
    checks.push(("determinism", deterministic));
    checks.push(("s_ref scaling", scaling));
    checks.push(("monotonicity", monotone));
    let pass = checks.iter().all(|c| c.1);
    let detail: Vec<String> = checks.iter().map(|(n, ok)| format!("{n} {ok}")).collect();
    verdict(8, pass, &detail.join(", "));
    assert!(pass);
}
