use serde::Serialize;

use super::{SprayCell, SprayMap};
use crate::field_io::FieldSpec;
use crate::geometry::raster::CountGrid;
use crate::geometry::Point;

/// Metric raster resolution in metres.
pub const METRIC_RESOLUTION: f64 = 0.05;
/// Rows per raster band; bounds memory on large fields.
const BAND_ROWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageMetrics {
    /// Total applied volume, litres.
    pub s: f64,
    pub s_field_ref: f64,
    pub delta_s_m: f64,
    /// Percent of `s_field_ref`.
    pub delta_s_pct: f64,
    /// Field area (m²) not covered by any cell.
    pub gap_area: f64,
    /// Field area (m²) covered at least twice.
    pub overlap_area: f64,
    /// Path length, metres.
    pub path_length: f64,
}

/// Visits the field raster band by band with every cell reaching that band
/// added. `visit` gets the band grid and its field mask.
fn for_each_band(cells: &[SprayCell], field: &FieldSpec, mut visit: impl FnMut(&CountGrid, &[bool])) {
    let res = METRIC_RESOLUTION;
    let (lo, hi) = field.contour.bbox();
    let nx = ((hi.x - lo.x) / res).ceil().max(1.0) as usize;
    let ny = ((hi.y - lo.y) / res).ceil().max(1.0) as usize;
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| {
        cells[a].cell.bbox().0.y.total_cmp(&cells[b].cell.bbox().0.y)
    });
    for band in 0..ny.div_ceil(BAND_ROWS) {
        let rows = BAND_ROWS.min(ny - band * BAND_ROWS);
        let y0 = lo.y + (band * BAND_ROWS) as f64 * res;
        let y1 = y0 + rows as f64 * res;
        let mut grid = CountGrid::with_dims(Point::new(lo.x, y0), res, nx, rows);
        for &i in &order {
            let (clo, chi) = cells[i].cell.bbox();
            if clo.y > y1 {
                break;
            }
            if chi.y >= y0 {
                grid.add_quad(&cells[i].cell);
            }
        }
        let mask = grid.polygon_mask(&field.contour, &field.obstacles);
        visit(&grid, &mask);
    }
}

/// Volumes from the map; gap and overlap from a 0.05 m raster restricted
/// to the cultivated area (obstacles excluded).
pub fn coverage_metrics(
    map: &SprayMap,
    field: &FieldSpec,
    path_length: f64,
    s_ref: f64,
) -> CoverageMetrics {
    let mut gap = 0.0;
    let mut overlap = 0.0;
    for_each_band(&map.cells, field, |grid, mask| {
        gap += grid.area_where(Some(mask), |c| c == 0);
        overlap += grid.area_where(Some(mask), |c| c >= 2);
    });
    let s = map.total_volume();
    let s_field_ref = field.area_m2() * s_ref / 10_000.0;
    CoverageMetrics {
        s,
        s_field_ref,
        delta_s_m: s - s_field_ref,
        delta_s_pct: 100.0 * (s - s_field_ref) / s_field_ref,
        gap_area: gap,
        overlap_area: overlap,
        path_length,
    }
}

/// Fills each cell's overlap count from the raster pixel at its centroid.
pub(crate) fn with_overlap_counts(mut map: SprayMap, field: &FieldSpec) -> SprayMap {
    let centroids: Vec<Point> = map.cells.iter().map(|c| c.cell.centroid()).collect();
    let mut counts = vec![1u8; centroids.len()];
    for_each_band(&map.cells, field, |grid, _| {
        for (k, &p) in centroids.iter().enumerate() {
            if let Some(c) = grid.count_at(p) {
                counts[k] = c.max(1);
            }
        }
    });
    for (cell, c) in map.cells.iter_mut().zip(counts) {
        cell.overlap_count = c;
    }
    map
}
