use proptest::prelude::*;

use spraysim::economics::{breakeven_volume, years_to_profit, CostParams};
use spraysim::field_io::synth::generate_fields;
use spraysim::field_io::SectionMode;
use spraysim::geometry::{union_area, CellKind, Point, QuadCell, SprayedArea};
use spraysim::planner::{Sample, SegmentKind};
use spraysim::simulator::step_candidates;
use spraysim::switching::{filter_overlap_polygon, nominal_flows, section_velocities, SectionLayout};

fn layout(per_side: usize, w: f64) -> SectionLayout {
    SectionLayout::new(2.0 * per_side as f64 * w, w, SectionMode::Multi).unwrap()
}

fn sample(x: f64, y: f64, heading: f64, yaw_rate: f64) -> Sample {
    Sample {
        position: Point::new(x, y),
        heading,
        yaw_rate,
        kind: SegmentKind::Headland,
        lane_id: None,
    }
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> QuadCell {
    QuadCell::new(
        [
            Point::new(x, y),
            Point::new(x + w, y),
            Point::new(x + w, y + h),
            Point::new(x, y + h),
        ],
        CellKind::Straight,
        1,
    )
}

fn costs() -> impl Strategy<Value = CostParams> {
    (1.0..60.0f64, 0.9..0.999f64, 1e4..5e5f64, 10.0..2000.0f64, 1.0..20.0f64).prop_map(
        |(c, ratio, k, a, n)| CostParams {
            c_chemical: c,
            water_ratio: ratio,
            delta_k: k,
            a_total: a,
            n_runs: n,
            ..CostParams::default()
        },
    )
}

proptest! {
    #[test]
    fn offsets_are_symmetric(n in 1usize..40, w in 0.1..1.5f64) {
        let l = layout(n, w);
        let off = l.offsets();
        prop_assert_eq!(off.len(), 2 * n);
        for (a, b) in off.iter().zip(off.iter().rev()) {
            prop_assert!((a + b).abs() < 1e-9);
        }
        prop_assert!((l.working_width() - 2.0 * n as f64 * w).abs() < 1e-9);
    }

    // total boom flow does not depend on the yaw rate while no section reverses
    #[test]
    fn flows_close_to_uniform_total(n in 1usize..30, w in 0.2..1.0f64, v in 0.5..4.0f64,
                                    frac in -0.95..0.95f64, s_ref in 10.0..400.0f64) {
        let l = layout(n, w);
        let half = n as f64 * w;
        let yaw = frac * v / half;
        let vel = section_velocities(v, yaw, &l);
        prop_assert!(vel.iter().all(|&x| x >= 0.0));
        let total: f64 = nominal_flows(&vel, s_ref, w).iter().sum();
        let uniform = s_ref / 1e4 * v * 2.0 * half;
        prop_assert!((total - uniform).abs() <= 1e-9 * uniform);
    }

    #[test]
    fn straight_cells_get_reference_rate(n in 1usize..20, ds in 0.2..2.0f64, h in -3.1..3.1f64,
                                         s_ref in 10.0..400.0f64) {
        let l = layout(n, 0.5);
        let b = Point::new(ds * h.cos(), ds * h.sin());
        let cands = step_candidates(&l, &sample(0.0, 0.0, h, 0.0), &sample(b.x, b.y, h, 0.0), 2.0, s_ref);
        prop_assert_eq!(cands.len(), 2 * n);
        for c in &cands {
            let rate = c.volume / (c.cell.area / 1e4);
            prop_assert!((rate - s_ref).abs() <= 1e-6);
        }
    }

    #[test]
    fn candidate_volume_scales_with_rate(n in 1usize..20, yaw in -0.05..0.05f64, k in 0.1..10.0f64) {
        let l = layout(n, 0.5);
        let (a, b) = (sample(0.0, 0.0, 0.0, 0.0), sample(1.0, 0.0, yaw, yaw * 2.0));
        let one: Vec<f64> = step_candidates(&l, &a, &b, 2.0, 50.0).iter().map(|c| c.volume).collect();
        let scaled: Vec<f64> = step_candidates(&l, &a, &b, 2.0, 50.0 * k).iter().map(|c| c.volume).collect();
        prop_assert_eq!(one.len(), scaled.len());
        for (x, y) in one.iter().zip(&scaled) {
            prop_assert!((y - k * x).abs() <= 1e-9 * (k * x).abs().max(1e-12));
        }
    }

    #[test]
    fn polygon_filter_is_idempotent(cells in prop::collection::vec((0.0..20.0f64, 0.0..20.0f64, 0.5..4.0f64, 0.5..4.0f64), 1..12),
                                    prior in prop::collection::vec((0.0..20.0f64, 0.0..20.0f64, 0.5..4.0f64, 0.5..4.0f64), 0..12)) {
        let mut state = SprayedArea::unbounded();
        state.push_step(prior.iter().map(|&(x, y, w, h)| rect(x, y, w, h)));
        let cells: Vec<QuadCell> = cells.iter().map(|&(x, y, w, h)| rect(x, y, w, h)).collect();
        let once = filter_overlap_polygon(cells, &state);
        let twice = filter_overlap_polygon(once.clone(), &state);
        prop_assert_eq!(&once, &twice);
        // once pushed, the survivors themselves are sprayed
        state.push_step(once.iter().cloned());
        prop_assert!(filter_overlap_polygon(once, &state).is_empty());
    }

    #[test]
    fn union_is_bounded_by_parts(cells in prop::collection::vec((0.0..10.0f64, 0.0..10.0f64, 0.1..3.0f64, 0.1..3.0f64), 1..10)) {
        let cells: Vec<QuadCell> = cells.iter().map(|&(x, y, w, h)| rect(x, y, w, h)).collect();
        let u = union_area(&cells);
        let sum: f64 = cells.iter().map(|c| c.area).sum();
        let max = cells.iter().map(|c| c.area).fold(0.0, f64::max);
        prop_assert!(u <= sum + 1e-9);
        prop_assert!(u >= max - 1e-9);
    }

    #[test]
    fn payback_is_inverse_in_area_and_runs(p in costs(), ds in 1.0..50.0f64, f in 1.1..5.0f64) {
        let y = years_to_profit(ds, &p).unwrap();
        let bigger = CostParams { a_total: p.a_total * f, ..p.clone() };
        let busier = CostParams { n_runs: p.n_runs * f, ..p.clone() };
        prop_assert!((years_to_profit(ds, &bigger).unwrap() * f - y).abs() <= 1e-9 * y);
        prop_assert!((years_to_profit(ds, &busier).unwrap() * f - y).abs() <= 1e-9 * y);
    }

    #[test]
    fn breakeven_pays_the_price(p in costs()) {
        let v = breakeven_volume(&p).unwrap();
        prop_assert!((v * p.cost_per_litre() - p.delta_k).abs() <= 1e-9 * p.delta_k);
        let dear = CostParams { delta_k: 2.0 * p.delta_k, ..p.clone() };
        prop_assert!((breakeven_volume(&dear).unwrap() - 2.0 * v).abs() <= 1e-9 * v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn field_generation_is_deterministic(seed in any::<u64>(), n in 1usize..6) {
        let a = generate_fields(n, seed);
        let b = generate_fields(n, seed);
        prop_assert_eq!(a.len(), n);
        for ((ka, fa), (kb, fb)) in a.iter().zip(&b) {
            prop_assert_eq!(ka, kb);
            prop_assert_eq!(fa, fb);
        }
    }
}

#[test]
fn water_heavy_mix_halves_at_two_percent_chemical() {
    let p = CostParams { water_ratio: 0.98, ..CostParams::default() };
    let ratio = CostParams::default().cost_per_litre() / p.cost_per_litre();
    assert!((0.45..=0.55).contains(&ratio), "ratio {ratio}");
}
