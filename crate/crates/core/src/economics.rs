//! Spray-volume differences turned into money and payback times.

use serde::Serialize;
use thiserror::Error;

use crate::field_io::config::{parse_kv, parse_value};
use crate::field_io::ConfigError;

#[derive(Debug, Error, PartialEq)]
pub enum EconError {
    #[error("mixture cost per litre is zero; no volume pays back the investment")]
    ZeroCost,
    #[error("savings are zero; the investment is never recovered")]
    NeverProfitable,
    #[error("invalid parameter {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostParams {
    /// EUR per litre of chemical.
    pub c_chemical: f64,
    /// EUR per litre of water.
    pub c_water: f64,
    pub water_ratio: f64,
    /// Extra purchase price of the many-section machine, EUR.
    pub delta_k: f64,
    /// Farm area, ha.
    pub a_total: f64,
    /// Spray runs per field and year.
    pub n_runs: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            c_chemical: 30.0,
            c_water: 0.002,
            water_ratio: 0.99,
            delta_k: 100_000.0,
            a_total: 30.0,
            n_runs: 8.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), EconError> {
        if !(0.0..=1.0).contains(&self.water_ratio) {
            return Err(EconError::Invalid(format!("water_ratio {}", self.water_ratio)));
        }
        for (name, v) in [
            ("c_chemical", self.c_chemical),
            ("c_water", self.c_water),
            ("delta_k", self.delta_k),
            ("a_total", self.a_total),
            ("n_runs", self.n_runs),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EconError::Invalid(format!("{name} {v}")));
            }
        }
        Ok(())
    }

    /// Mixture cost in EUR per litre.
    pub fn cost_per_litre(&self) -> f64 {
        (1.0 - self.water_ratio) * self.c_chemical + self.water_ratio * self.c_water
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostResult {
    pub delta_s: f64,
    pub delta_c: f64,
    pub breakeven_volume: f64,
    /// `None` when the savings never recover the price difference.
    pub years: Option<f64>,
}

pub fn spray_delta(s_j: f64, s_multi: f64) -> f64 {
    s_j - s_multi
}

pub fn cost_delta(delta_s: f64, p: &CostParams) -> f64 {
    p.cost_per_litre() * delta_s
}

pub fn breakeven_volume(p: &CostParams) -> Result<f64, EconError> {
    let c = p.cost_per_litre();
    if c <= 0.0 {
        return Err(EconError::ZeroCost);
    }
    Ok(p.delta_k / c)
}

/// Years until per-hectare savings cover the price difference.
pub fn years_to_profit(delta_s_per_ha: f64, p: &CostParams) -> Result<f64, EconError> {
    let yearly = cost_delta(delta_s_per_ha, p) * p.a_total * p.n_runs;
    if yearly <= 0.0 {
        return Err(EconError::NeverProfitable);
    }
    Ok(p.delta_k / yearly)
}

/// Everything for one field-level volume difference (litres).
pub fn evaluate(delta_s: f64, delta_s_per_ha: f64, p: &CostParams) -> CostResult {
    CostResult {
        delta_s,
        delta_c: cost_delta(delta_s, p),
        breakeven_volume: breakeven_volume(p).unwrap_or(f64::INFINITY),
        years: years_to_profit(delta_s_per_ha, p).ok(),
    }
}

/// Parameter grid for the payback table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostGrid {
    /// Per-hectare volume differences, l/ha.
    pub deltas: Vec<f64>,
    pub delta_k: Vec<f64>,
    pub a_total: Vec<f64>,
    pub c_chemical: Vec<f64>,
}

impl Default for CostGrid {
    fn default() -> Self {
        Self {
            deltas: vec![18.6, 16.7, 22.5, 18.7],
            delta_k: vec![100_000.0, 200_000.0],
            a_total: vec![30.0, 100.0, 300.0, 600.0, 1000.0],
            c_chemical: vec![30.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub delta_s_per_ha: f64,
    pub delta_k: f64,
    pub a_total: f64,
    pub c_chemical: f64,
    pub years: Option<f64>,
}

/// Payback years over the whole grid, ordered delta, price, area, chemical
/// cost. Other parameters come from `base`.
pub fn cost_table(grid: &CostGrid, base: &CostParams) -> Vec<CostRow> {
    let mut rows = Vec::new();
    for &d in &grid.deltas {
        for &k in &grid.delta_k {
            for &a in &grid.a_total {
                for &c in &grid.c_chemical {
                    let p = CostParams {
                        delta_k: k,
                        a_total: a,
                        c_chemical: c,
                        ..base.clone()
                    };
                    rows.push(CostRow {
                        delta_s_per_ha: d,
                        delta_k: k,
                        a_total: a,
                        c_chemical: c,
                        years: years_to_profit(d, &p).ok(),
                    });
                }
            }
        }
    }
    rows
}

fn parse_list(line: usize, key: &str, val: &str) -> Result<Vec<f64>, ConfigError> {
    val.split(',')
        .map(|v| parse_value::<f64>(line, key, v.trim()))
        .collect()
}

/// Reads `key = value` economics parameters. Grid keys take comma lists;
/// a single `c_chemical`, `delta_k` or `a_total` also sets the base value.
pub fn parse_params(text: &str) -> Result<(CostParams, CostGrid), ConfigError> {
    let mut p = CostParams::default();
    let mut g = CostGrid::default();
    for (line, key, val) in parse_kv(text)? {
        match key.as_str() {
            "c_water" => p.c_water = parse_value(line, &key, &val)?,
            "water_ratio" => p.water_ratio = parse_value(line, &key, &val)?,
            "n_runs" => p.n_runs = parse_value(line, &key, &val)?,
            "deltas" => g.deltas = parse_list(line, &key, &val)?,
            "c_chemical" => {
                g.c_chemical = parse_list(line, &key, &val)?;
                p.c_chemical = g.c_chemical[0];
            }
            "delta_k" => {
                g.delta_k = parse_list(line, &key, &val)?;
                p.delta_k = g.delta_k[0];
            }
            "a_total" => {
                g.a_total = parse_list(line, &key, &val)?;
                p.a_total = g.a_total[0];
            }
            _ => return Err(ConfigError::UnknownKey { line, key }),
        }
    }
    p.validate().map_err(|e| ConfigError::Invalid(vec![e.to_string()]))?;
    Ok((p, g))
}
