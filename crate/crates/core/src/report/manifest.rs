//! Batch runs described by a JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::economics::CostParams;
use crate::field_io::{load_field, parse_config, Method, RunConfig, SectionMode};
use crate::simulator::run_setups;

use super::{economics_csv, pathlengths_csv, render_svg, volumes_csv, FieldResult};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("manifest lists no fields")]
    NoFields,
    #[error("unknown setup {0:?}; expected e.g. M1_1, M2_2 or M1_48")]
    Setup(String),
    #[error("config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("output directory {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub fields: Vec<PathBuf>,
    #[serde(default)]
    pub config: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Setup names like `M1_48`; empty means all six.
    #[serde(default)]
    pub setups: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunManifest {
    /// Reads a manifest; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = fs::read_to_string(path).map_err(|source| ManifestError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut m: RunManifest =
            serde_json::from_str(&text).map_err(|source| ManifestError::Parse {
                path: path.to_path_buf(),
                source,
            })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        m.fields.iter_mut().for_each(fix);
        if let Some(c) = m.config.as_mut() {
            fix(c);
        }
        fix(&mut m.output_dir);
        if m.fields.is_empty() {
            return Err(ManifestError::NoFields);
        }
        Ok(m)
    }

    pub fn run_config(&self) -> Result<RunConfig, ManifestError> {
        let Some(path) = &self.config else {
            return Ok(RunConfig::default());
        };
        let err = |msg: String| ManifestError::Config {
            path: path.clone(),
            msg,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        parse_config(&text, &[]).map_err(|e| err(e.to_string()))
    }

    /// Requested setups in report order.
    pub fn setup_list(&self, total_sections: usize) -> Result<Vec<(Method, SectionMode)>, ManifestError> {
        let all: Vec<(Method, SectionMode)> = Method::ALL
            .into_iter()
            .flat_map(|m| SectionMode::ALL.into_iter().map(move |s| (m, s)))
            .collect();
        if self.setups.is_empty() {
            return Ok(all);
        }
        let mut want = Vec::new();
        for name in &self.setups {
            want.push(parse_setup(name, total_sections).ok_or_else(|| ManifestError::Setup(name.clone()))?);
        }
        Ok(all.into_iter().filter(|s| want.contains(s)).collect())
    }
}

fn parse_setup(name: &str, total_sections: usize) -> Option<(Method, SectionMode)> {
    let (m, s) = name.split_once(['_', ':', '/'])?;
    let method = m.parse().ok()?;
    let mode = if s.trim() == total_sections.to_string() {
        SectionMode::Multi
    } else {
        s.parse().ok()?
    };
    Some((method, mode))
}

/// What a run produced and which fields failed.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub written: Vec<PathBuf>,
    pub failures: Vec<(PathBuf, String)>,
    pub results: Vec<FieldResult>,
}

fn write(dir: &Path, name: &str, body: &str, summary: &mut RunSummary) -> Result<(), ManifestError> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| ManifestError::Output {
        path: path.clone(),
        source,
    })?;
    summary.written.push(path);
    Ok(())
}

/// Runs every field of the manifest into `out`. Failing fields are recorded
/// and skipped; tables cover the fields that ran.
pub fn execute(m: &RunManifest, out: &Path, econ: &CostParams) -> Result<RunSummary, ManifestError> {
    let cfg = m.run_config()?;
    let total = cfg.total_sections();
    let setups = m.setup_list(total)?;
    fs::create_dir_all(out).map_err(|source| ManifestError::Output {
        path: out.to_path_buf(),
        source,
    })?;
    let mut summary = RunSummary::default();
    for path in &m.fields {
        let field = match load_field(path) {
            Ok(f) => f,
            Err(e) => {
                summary.failures.push((path.clone(), e.to_string()));
                continue;
            }
        };
        let runs = match run_setups(&field, &cfg, &setups) {
            Ok(r) => r,
            Err(e) => {
                summary.failures.push((path.clone(), e.to_string()));
                continue;
            }
        };
        for (res, map, plan) in &runs {
            let name = format!("{}_{}_{}.svg", field.id, res.method, res.mode.label(total));
            let svg = render_svg(map, &field, Some(plan), cfg.s_volume_ref);
            write(out, &name, &svg, &mut summary)?;
        }
        summary.results.push(FieldResult {
            field_id: field.id.clone(),
            area_ha: field.area_ha,
            setups: runs.into_iter().map(|r| r.0).collect(),
        });
    }
    let results = std::mem::take(&mut summary.results);
    write(out, "pathlengths.csv", &pathlengths_csv(&results), &mut summary)?;
    write(out, "volumes.csv", &volumes_csv(&results, total), &mut summary)?;
    write(out, "economics.csv", &economics_csv(&results, econ, total), &mut summary)?;
    summary.results = results;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_names() {
        assert_eq!(parse_setup("M1_48", 48), Some((Method::M1, SectionMode::Multi)));
        assert_eq!(parse_setup("m2_2", 48), Some((Method::M2, SectionMode::Two)));
        assert_eq!(parse_setup("M2:one", 48), Some((Method::M2, SectionMode::One)));
        assert_eq!(parse_setup("M3_1", 48), None);
        assert_eq!(parse_setup("M1", 48), None);
    }
}
