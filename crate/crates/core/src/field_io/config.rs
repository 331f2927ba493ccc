use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectionMode {
    One,
    Two,
    Multi,
}

impl SectionMode {
    pub const ALL: [SectionMode; 3] = [SectionMode::One, SectionMode::Two, SectionMode::Multi];

    /// Column suffix used in reports: number of independently switched groups.
    pub fn label(self, total_sections: usize) -> String {
        match self {
            SectionMode::One => "1".into(),
            SectionMode::Two => "2".into(),
            SectionMode::Multi => total_sections.to_string(),
        }
    }
}

impl FromStr for SectionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "one" | "1" => Ok(SectionMode::One),
            "two" | "2" => Ok(SectionMode::Two),
            "multi" | "asc" => Ok(SectionMode::Multi),
            other => Err(format!("unknown section mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    M1,
    M2,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::M1, Method::M2];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::M1 => "M1",
            Method::M2 => "M2",
        })
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M1" => Ok(Method::M1),
            "M2" => Ok(Method::M2),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub working_width: f64,
    pub nozzle_spacing: f64,
    pub section_mode: SectionMode,
    pub v_ref: f64,
    /// Target application rate in l/ha.
    pub s_volume_ref: f64,
    pub sample_spacing: f64,
    pub min_turn_radius: f64,
    pub method: Method,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            working_width: 24.0,
            nozzle_spacing: 0.5,
            section_mode: SectionMode::Multi,
            v_ref: 2.0,
            s_volume_ref: 46.78,
            sample_spacing: 1.0,
            min_turn_radius: 5.0,
            method: Method::M1,
        }
    }
}

impl RunConfig {
    pub fn with(&self, method: Method, mode: SectionMode) -> Self {
        Self {
            method,
            section_mode: mode,
            ..self.clone()
        }
    }

    /// Total number of boom sections (both sides).
    pub fn total_sections(&self) -> usize {
        (self.working_width / self.nozzle_spacing).round() as usize
    }
}

/// Checks every config invariant; on success returns the total section count.
pub fn validate_config(cfg: &RunConfig) -> Result<usize, Vec<String>> {
    let mut v = Vec::new();
    let positive = [
        ("working_width", cfg.working_width),
        ("nozzle_spacing", cfg.nozzle_spacing),
        ("v_ref", cfg.v_ref),
        ("s_volume_ref", cfg.s_volume_ref),
        ("sample_spacing", cfg.sample_spacing),
        ("min_turn_radius", cfg.min_turn_radius),
    ];
    for (name, x) in positive {
        if !(x.is_finite() && x > 0.0) {
            v.push(format!("{name} must be a positive number (got {x})"));
        }
    }
    if cfg.working_width > 0.0 && cfg.nozzle_spacing > 0.0 {
        let ratio = cfg.working_width / cfg.nozzle_spacing;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.max(1.0) || n < 2.0 || n % 2.0 != 0.0 {
            v.push("W/w_nozzle not an even integer".to_string());
        }
    }
    if v.is_empty() {
        Ok(cfg.total_sections())
    } else {
        Err(v)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {msg}")]
    Value {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

/// Splits flat `key = value` text, skipping blanks and `#` comments.
pub(crate) fn parse_kv(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, val) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: i + 1 })?;
        out.push((i + 1, k.trim().to_string(), val.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_value<T: FromStr>(line: usize, key: &str, val: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    val.parse::<T>().map_err(|e| ConfigError::Value {
        line,
        key: key.to_string(),
        msg: e.to_string(),
    })
}

/// Reads a flat config, starting from defaults. Keys not belonging to
/// `RunConfig` are rejected unless listed in `foreign`.
pub fn parse_config(text: &str, foreign: &[&str]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (line, key, val) in parse_kv(text)? {
        match key.as_str() {
            "working_width" => cfg.working_width = parse_value(line, &key, &val)?,
            "nozzle_spacing" => cfg.nozzle_spacing = parse_value(line, &key, &val)?,
            "section_mode" => cfg.section_mode = parse_value(line, &key, &val)?,
            "v_ref" => cfg.v_ref = parse_value(line, &key, &val)?,
            "s_volume_ref" => cfg.s_volume_ref = parse_value(line, &key, &val)?,
            "sample_spacing" => cfg.sample_spacing = parse_value(line, &key, &val)?,
            "min_turn_radius" => cfg.min_turn_radius = parse_value(line, &key, &val)?,
            "method" => cfg.method = parse_value(line, &key, &val)?,
            k if foreign.contains(&k) => {}
            _ => return Err(ConfigError::UnknownKey { line, key }),
        }
    }
    validate_config(&cfg).map_err(ConfigError::Invalid)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_boom_has_48_sections() {
        assert_eq!(validate_config(&RunConfig::default()), Ok(48));
    }

    #[test]
    fn odd_ratio_is_a_violation() {
        let cfg = RunConfig {
            nozzle_spacing: 0.7,
            ..RunConfig::default()
        };
        let v = validate_config(&cfg).unwrap_err();
        assert!(v.iter().any(|m| m == "W/w_nozzle not an even integer"), "{v:?}");
    }

    #[test]
    fn zero_spacing_is_a_violation() {
        let cfg = RunConfig {
            sample_spacing: 0.0,
            ..RunConfig::default()
        };
        let v = validate_config(&cfg).unwrap_err();
        assert!(v.iter().any(|m| m.starts_with("sample_spacing")));
    }

    #[test]
    fn flat_file_overrides_defaults() {
        let cfg = parse_config(
            "# boom\nworking_width = 12\nsection_mode = two\nmethod=M2\nC_chemical = 30\n",
            &["C_chemical"],
        )
        .unwrap();
        assert_eq!(cfg.working_width, 12.0);
        assert_eq!(cfg.section_mode, SectionMode::Two);
        assert_eq!(cfg.method, Method::M2);
        assert!(matches!(
            parse_config("bogus = 1", &[]),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
    }
}
