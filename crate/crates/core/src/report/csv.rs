use std::fmt::Write as _;

use crate::economics::{cost_delta, years_to_profit, CostParams, CostRow};
use crate::field_io::{Method, SectionMode};
use crate::simulator::{SetupResult, SprayMap};

/// Results of the six setups for one field.
#[derive(Debug, Clone)]
pub struct FieldResult {
    pub field_id: String,
    pub area_ha: f64,
    pub setups: Vec<SetupResult>,
}

impl FieldResult {
    pub fn get(&self, method: Method, mode: SectionMode) -> Option<&SetupResult> {
        self.setups
            .iter()
            .find(|r| r.method == method && r.mode == mode)
    }

    fn volume(&self, method: Method, mode: SectionMode) -> Option<f64> {
        self.get(method, mode).map(|r| r.metrics.s)
    }

    fn length(&self, method: Method) -> Option<f64> {
        self.setups
            .iter()
            .find(|r| r.method == method)
            .map(|r| r.metrics.path_length)
    }

    fn s_ref(&self) -> Option<f64> {
        self.setups.first().map(|r| r.metrics.s_field_ref)
    }
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_default()
}

pub fn pathlengths_csv(results: &[FieldResult]) -> String {
    let mut out = String::from("field,A_field_ha,L_M1,L_M2,dL_m,dL_pct\n");
    for r in results {
        let (l1, l2) = (r.length(Method::M1), r.length(Method::M2));
        let d = l1.zip(l2).map(|(a, b)| b - a);
        let pct = l1.zip(d).map(|(a, d)| 100.0 * d / a);
        let _ = writeln!(
            out,
            "{},{:.2},{},{},{},{}",
            r.field_id,
            r.area_ha,
            opt(l1, 1),
            opt(l2, 1),
            opt(d, 1),
            opt(pct, 2)
        );
    }
    out
}

pub fn volumes_csv(results: &[FieldResult], total_sections: usize) -> String {
    let mut out = String::from("field,A_field_ha,S_field_ref");
    for m in Method::ALL {
        for mode in SectionMode::ALL {
            let _ = write!(out, ",S_{m}_{}", mode.label(total_sections));
        }
    }
    out.push('\n');
    for r in results {
        let _ = write!(out, "{},{:.2},{}", r.field_id, r.area_ha, opt(r.s_ref(), 2));
        for m in Method::ALL {
            for mode in SectionMode::ALL {
                let _ = write!(out, ",{}", opt(r.volume(m, mode), 2));
            }
        }
        out.push('\n');
    }
    out
}

/// Volume savings of the many-section boom over the one- and two-block
/// booms, per field and as the mean of the per-hectare values, with the
/// resulting cost per run, runs to break even and payback years.
pub fn economics_csv(results: &[FieldResult], p: &CostParams, total_sections: usize) -> String {
    let mut out = String::from(
        "field,method,setup,dS_l,dS_l_per_ha,dC_eur_per_run,runs_to_profit,N_years_star\n",
    );
    let multi = SectionMode::Multi;
    for m in Method::ALL {
        for mode in [SectionMode::One, SectionMode::Two] {
            let mut per_ha = Vec::new();
            for r in results {
                let (Some(sj), Some(sm)) = (r.volume(m, mode), r.volume(m, multi)) else {
                    continue;
                };
                let ds = crate::economics::spray_delta(sj, sm);
                let dsh = ds / r.area_ha;
                per_ha.push(dsh);
                let dc = cost_delta(ds, p);
                let runs = (dc > 0.0).then(|| p.delta_k / dc);
                let _ = writeln!(
                    out,
                    "{},{m},{},{:.3},{:.3},{:.4},{},{}",
                    r.field_id,
                    mode.label(total_sections),
                    ds,
                    dsh,
                    dc,
                    opt(runs, 0),
                    opt(years_to_profit(dsh, p).ok(), 2)
                );
            }
            if !per_ha.is_empty() {
                let mean = per_ha.iter().sum::<f64>() / per_ha.len() as f64;
                let _ = writeln!(
                    out,
                    "mean,{m},{},,{:.3},,,{}",
                    mode.label(total_sections),
                    mean,
                    opt(years_to_profit(mean, p).ok(), 2)
                );
            }
        }
    }
    out
}

pub fn payback_csv(rows: &[CostRow]) -> String {
    let mut out = String::from("dS_l_per_ha,dK_eur,A_total_ha,C_chemical,N_years_star\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.1},{:.0},{:.0},{:.1},{}",
            r.delta_s_per_ha,
            r.delta_k,
            r.a_total,
            r.c_chemical,
            opt(r.years, 1)
        );
    }
    out
}

/// Cell corners and applied rate, one row per sprayed cell.
pub fn spraymap_csv(map: &SprayMap) -> String {
    let mut out = String::from("step,section,x0,y0,x1,y1,x2,y2,x3,y3,volume_l,rate_l_per_ha,count\n");
    for c in &map.cells {
        let _ = write!(out, "{},{}", c.step, c.cell.section_index);
        for p in c.cell.corners {
            let _ = write!(out, ",{:.3},{:.3}", p.x, p.y);
        }
        let _ = writeln!(
            out,
            ",{:.6},{:.3},{}",
            c.applied_volume, c.applied_rate, c.overlap_count
        );
    }
    out
}
