//! Field geometry files and run configuration.

pub(crate) mod config;
pub mod synth;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    point_in_ring, polygon_area, segments_intersect, GeometryError, Point, Polygon,
};

pub use config::{
    parse_config, validate_config, ConfigError, Method, RunConfig, SectionMode,
};

/// Mean Earth radius used by the local equirectangular projection.
const EARTH_RADIUS_M: f64 = 6_371_008.8;
const ENTRY_TOLERANCE_M: f64 = 1.0;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{ring}: {source}")]
    Ring {
        ring: String,
        source: GeometryError,
    },
    #[error("{ring}: edges {first} and {second} cross")]
    SelfIntersecting {
        ring: String,
        first: usize,
        second: usize,
    },
    #[error("obstacle {obstacle}: vertex {vertex} is not strictly inside the contour")]
    ObstacleOutside { obstacle: usize, vertex: usize },
    #[error("obstacles {first} and {second} overlap")]
    ObstaclesOverlap { first: usize, second: usize },
    #[error("entry point is {distance:.3} m from the contour (limit 1 m)")]
    EntryOffContour { distance: f64 },
    #[error("unsupported crs {0:?}")]
    UnknownCrs(String),
}

/// A validated field: CCW contour, CW obstacle holes, entry on the contour.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub id: String,
    pub contour: Polygon,
    pub obstacles: Vec<Polygon>,
    pub entry: Point,
    pub area_ha: f64,
}

impl FieldSpec {
    pub fn new(
        id: impl Into<String>,
        contour: Polygon,
        obstacles: Vec<Polygon>,
        entry: Point,
    ) -> Result<Self, FieldError> {
        // checks run on the rings as given so indices match the input
        check_simple("contour", &contour)?;
        for (k, obs) in obstacles.iter().enumerate() {
            check_simple(&format!("obstacle {k}"), obs)?;
            for (v, &p) in obs.vertices().iter().enumerate() {
                if !point_in_ring(p, contour.vertices()) || contour.boundary_distance(p) < 1e-9 {
                    return Err(FieldError::ObstacleOutside {
                        obstacle: k,
                        vertex: v,
                    });
                }
            }
            // an obstacle edge may still cross a reflex part of the contour
            for (a, b) in obs.edges() {
                if contour.edges().any(|(c, d)| segments_intersect(a, b, c, d)) {
                    return Err(FieldError::ObstacleOutside {
                        obstacle: k,
                        vertex: 0,
                    });
                }
            }
        }
        for i in 0..obstacles.len() {
            for j in (i + 1)..obstacles.len() {
                if rings_touch(&obstacles[i], &obstacles[j]) {
                    return Err(FieldError::ObstaclesOverlap {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        let distance = contour.boundary_distance(entry);
        if distance > ENTRY_TOLERANCE_M {
            return Err(FieldError::EntryOffContour { distance });
        }
        let contour = contour.to_ccw();
        let obstacles: Vec<Polygon> = obstacles.iter().map(Polygon::to_cw).collect();
        let holes: f64 = obstacles.iter().map(|o| polygon_area(o).abs()).sum();
        let area_ha = (polygon_area(&contour) - holes) / 10_000.0;
        Ok(Self {
            id: id.into(),
            contour,
            obstacles,
            entry,
            area_ha,
        })
    }

    /// Cultivated area in m².
    pub fn area_m2(&self) -> f64 {
        self.area_ha * 10_000.0
    }

    /// True for points inside the contour and outside every obstacle.
    pub fn contains(&self, p: Point) -> bool {
        crate::geometry::point_in_polygon(p, &self.contour, &self.obstacles)
    }
}

fn check_simple(ring: &str, poly: &Polygon) -> Result<(), FieldError> {
    if let Some((first, second)) = poly.find_self_intersection() {
        return Err(FieldError::SelfIntersecting {
            ring: ring.to_string(),
            first,
            second,
        });
    }
    Ok(())
}

fn rings_touch(a: &Polygon, b: &Polygon) -> bool {
    a.edges()
        .any(|(p, q)| b.edges().any(|(r, s)| segments_intersect(p, q, r, s)))
        || point_in_ring(a.vertices()[0], b.vertices())
        || point_in_ring(b.vertices()[0], a.vertices())
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldFile {
    #[serde(default)]
    id: Option<String>,
    contour: Vec<[f64; 2]>,
    #[serde(default)]
    obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    entry: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    crs: Option<String>,
}

fn is_geodetic(crs: &str) -> Result<bool, FieldError> {
    match crs.to_ascii_lowercase().as_str() {
        "wgs84" | "epsg:4326" | "geodetic" | "lonlat" => Ok(true),
        "local" | "metric" | "planar" => Ok(false),
        _ => Err(FieldError::UnknownCrs(crs.to_string())),
    }
}

fn ring_from(
    name: &str,
    pts: &[[f64; 2]],
    project: &dyn Fn([f64; 2]) -> Point,
) -> Result<Polygon, FieldError> {
    Polygon::new(pts.iter().map(|&p| project(p)).collect()).map_err(|source| FieldError::Ring {
        ring: name.to_string(),
        source,
    })
}

/// Parses a field document. `id_hint` is used when the document has no id.
pub fn parse_field(text: &str, id_hint: &str, path: &Path) -> Result<FieldSpec, FieldError> {
    let file: FieldFile = serde_json::from_str(text).map_err(|source| FieldError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let geodetic = match &file.crs {
        Some(c) => is_geodetic(c)?,
        None => false,
    };
    let project: Box<dyn Fn([f64; 2]) -> Point> = if geodetic {
        let n = file.contour.len().max(1) as f64;
        let lon0 = file.contour.iter().map(|p| p[0]).sum::<f64>() / n;
        let lat0 = file.contour.iter().map(|p| p[1]).sum::<f64>() / n;
        let k = lat0.to_radians().cos();
        Box::new(move |p: [f64; 2]| {
            Point::new(
                EARTH_RADIUS_M * (p[0] - lon0).to_radians() * k,
                EARTH_RADIUS_M * (p[1] - lat0).to_radians(),
            )
        })
    } else {
        Box::new(|p: [f64; 2]| Point::new(p[0], p[1]))
    };
    let contour = ring_from("contour", &file.contour, &*project)?;
    let obstacles = file
        .obstacles
        .iter()
        .enumerate()
        .map(|(k, r)| ring_from(&format!("obstacle {k}"), r, &*project))
        .collect::<Result<Vec<_>, _>>()?;
    let entry = match file.entry {
        Some(e) => project(e),
        None => contour.vertices()[0],
    };
    let id = file.id.unwrap_or_else(|| id_hint.to_string());
    FieldSpec::new(id, contour, obstacles, entry)
}

pub fn load_field(path: &Path) -> Result<FieldSpec, FieldError> {
    let text = fs::read_to_string(path).map_err(|source| FieldError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("field");
    parse_field(&text, stem, path)
}

/// Serialises to the metric field format (no crs tag).
pub fn field_to_json(field: &FieldSpec) -> String {
    let ring = |p: &Polygon| p.vertices().iter().map(|v| [v.x, v.y]).collect::<Vec<_>>();
    let file = FieldFile {
        id: Some(field.id.clone()),
        contour: ring(&field.contour),
        obstacles: field.obstacles.iter().map(ring).collect(),
        entry: Some([field.entry.x, field.entry.y]),
        crs: None,
    };
    serde_json::to_string_pretty(&file).expect("field serialises")
}

pub fn save_field(field: &FieldSpec, path: &Path) -> Result<(), FieldError> {
    fs::write(path, field_to_json(field)).map_err(|source| FieldError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FieldSpec, FieldError> {
        parse_field(text, "t", Path::new("t.json"))
    }

    #[test]
    fn square_field_is_one_hectare() {
        let f = parse(r#"{"contour":[[0,0],[100,0],[100,100],[0,100]],"entry":[50,0]}"#).unwrap();
        assert!((f.area_ha - 1.0).abs() < 1e-12);
        assert_eq!(f.id, "t");
    }

    #[test]
    fn obstacle_is_subtracted() {
        let f = parse(
            r#"{"contour":[[0,0],[100,0],[100,100],[0,100]],
                "obstacles":[[[40,40],[50,40],[50,50],[40,50]]],"entry":[0,0]}"#,
        )
        .unwrap();
        assert!((f.area_ha - 0.99).abs() < 1e-12);
        assert!(!f.obstacles[0].is_ccw());
    }

    #[test]
    fn self_intersection_names_edges() {
        let err = parse(r#"{"contour":[[0,0],[100,100],[100,0],[0,100]]}"#).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, FieldError::SelfIntersecting { .. }), "{msg}");
        assert!(msg.contains("contour") && msg.contains("edges"), "{msg}");
    }

    #[test]
    fn obstacle_outside_names_vertex() {
        let err = parse(
            r#"{"contour":[[0,0],[100,0],[100,100],[0,100]],
                "obstacles":[[[90,90],[110,90],[110,95]]]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, FieldError::ObstacleOutside { obstacle: 0, vertex: 1 }), "{err}");
    }

    #[test]
    fn geodetic_square_is_projected() {
        // ~0.001 deg of latitude is ~111 m
        let f = parse(
            r#"{"crs":"wgs84","contour":[[10.0,50.0],[10.001,50.0],[10.001,50.001],[10.0,50.001]]}"#,
        )
        .unwrap();
        let (lo, hi) = f.contour.bbox();
        let dy = hi.y - lo.y;
        let dx = hi.x - lo.x;
        assert!((dy - 111.195).abs() < 0.1, "{dy}");
        assert!((dx - 111.195 * 50f64.to_radians().cos()).abs() < 0.1, "{dx}");
    }

    #[test]
    fn entry_far_from_contour_is_rejected() {
        let err = parse(r#"{"contour":[[0,0],[100,0],[100,100],[0,100]],"entry":[50,50]}"#)
            .unwrap_err();
        assert!(matches!(err, FieldError::EntryOffContour { .. }));
    }
}
