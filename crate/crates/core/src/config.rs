//! Run configuration documents.
//!
//! A config is a JSON object; unknown keys are rejected at every level.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circle::{DEFAULT_SAMPLES, DEGREE_TOLERANCE};
use crate::field::{Domain, GridSpec};
use crate::maps::MapSpec;
use crate::recovery::quadrature::QuadOptions;
use crate::recovery::Param;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridLayout {
    Polar,
    Cartesian,
}

/// Sampling grid on the disk `B_ℓ(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPolicy {
    pub layout: GridLayout,
    /// `[n_radial, n_angular]` or `[nx, ny]`.
    pub resolution: [usize; 2],
}

impl GridPolicy {
    pub fn grid(&self, ell: f64) -> Result<GridSpec> {
        let d = Domain::disk([0.0, 0.0], ell);
        let [a, b] = self.resolution;
        match self.layout {
            GridLayout::Polar => GridSpec::polar(d, a, b),
            GridLayout::Cartesian => GridSpec::cartesian(d, a, b),
        }
    }
}

/// Refinement parameters of a study: `{"k": [...]}` or `{"epsilon": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamList {
    K(Vec<u32>),
    Epsilon(Vec<f64>),
}

impl ParamList {
    pub fn params(&self) -> Vec<Param> {
        match self {
            ParamList::K(v) => v.iter().map(|&k| Param::K(k)).collect(),
            ParamList::Epsilon(v) => v.iter().map(|&e| Param::Epsilon(e)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest accepted distance of a raw winding from an integer.
    pub degree_residual: f64,
    /// If set, a study whose finest row misses the target by more than this
    /// relative error is a numeric-quality failure.
    pub study_relative_error: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            degree_residual: DEGREE_TOLERANCE,
            study_relative_error: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Directory for report files; reports go to stdout when unset.
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the command name.
    pub stem: Option<String>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub map: Option<MapSpec>,
    /// Base path of a saved field (`<base>.json` + `<base>.bin`).
    #[serde(default)]
    pub field: Option<PathBuf>,
    #[serde(default = "default_ell")]
    pub ell: f64,
    #[serde(default)]
    pub grid: Option<GridPolicy>,
    #[serde(default)]
    pub params: Option<ParamList>,
    #[serde(default)]
    pub center: Option<[f64; 2]>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub min_separation: Option<f64>,
    #[serde(default)]
    pub quadrature: QuadOptions,
    #[serde(default)]
    pub inheritance_radii: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_ell() -> f64 {
    1.0
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

/// What a command needs from its config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Degree,
    Singularities,
    Area,
    Study,
    Sample,
}

impl RunConfig {
    /// A config with only a map set.
    pub fn for_map(map: MapSpec) -> Self {
        RunConfig {
            map: Some(map),
            field: None,
            ell: default_ell(),
            grid: None,
            params: None,
            center: None,
            radius: None,
            samples: default_samples(),
            min_separation: None,
            quadrature: QuadOptions::default(),
            inheritance_radii: None,
            seed: 0,
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg: RunConfig = serde_json::from_value(raw.clone()).map_err(|e| Error::Config(e.to_string()))?;
        // Unit variants of internally tagged enums ignore extra keys, so compare
        // against the re-serialized form as well.
        let canonical = serde_json::to_value(&cfg)?;
        if let Some(path) = first_unknown_key(&raw, &canonical, String::new()) {
            return Err(Error::Config(format!("unknown field `{path}`")));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Checks that the fields `command` needs are present and consistent.
    pub fn validate(&self, command: Command) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            return fail("`ell` must be positive");
        }
        if self.map.is_some() && self.field.is_some() {
            return fail("give either `map` or `field`, not both");
        }
        if let Some(m) = &self.map {
            m.validate(self.ell)?;
        }
        let source = self.map.is_some() || self.field.is_some();
        match command {
            Command::Degree => {
                if !source {
                    return fail("degree needs `map` or `field`");
                }
                if self.radius.is_none() {
                    return fail("degree needs `radius`");
                }
            }
            Command::Singularities => {
                if !source {
                    return fail("singularities needs `map` or `field`");
                }
                if self.map.is_some() && self.grid.is_none() {
                    return fail("sampling a map needs `grid`");
                }
            }
            Command::Area | Command::Sample => {
                if !source {
                    return fail("this command needs `map` or `field`");
                }
                if self.map.is_some() && self.grid.is_none() && command == Command::Sample {
                    return fail("sample needs `grid`");
                }
            }
            Command::Study => {
                if self.map.is_none() {
                    return fail("study needs `map`");
                }
                if self.params.is_none() {
                    return fail("study needs `params`");
                }
            }
        }
        if !(self.tolerances.degree_residual > 0.0 && self.tolerances.degree_residual < 0.5) {
            return fail("`tolerances.degree_residual` must lie in (0, 0.5)");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the config, as hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

fn first_unknown_key(raw: &serde_json::Value, canonical: &serde_json::Value, path: String) -> Option<String> {
    use serde_json::Value;
    match (raw, canonical) {
        (Value::Object(a), Value::Object(b)) => a.iter().find_map(|(k, v)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            match b.get(k) {
                None => Some(p),
                Some(w) => first_unknown_key(v, w, p),
            }
        }),
        (Value::Array(a), Value::Array(b)) => a
            .iter()
            .zip(b)
            .enumerate()
            .find_map(|(i, (v, w))| first_unknown_key(v, w, format!("{path}[{i}]"))),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_study_config() {
        let c = RunConfig::from_json(
            r#"{"map": {"kind": "triple_junction"}, "params": {"epsilon": [0.125, 0.0625, 0.03125]},
                "quadrature": {"order": 8}}"#,
        )
        .unwrap();
        c.validate(Command::Study).unwrap();
        assert_eq!(c.quadrature.order, 8);
        assert_eq!(c.quadrature.panels, QuadOptions::default().panels);
        assert_eq!(c.params.unwrap().params().len(), 3);
    }

    #[test]
    fn rejects_unknown_keys_at_every_level() {
        for text in [
            r#"{"map": {"kind": "vortex"}, "colour": 1}"#,
            r#"{"map": {"kind": "vortex", "degree": 2}}"#,
            r#"{"map": {"kind": "vortex"}, "quadrature": {"nodes": 4}}"#,
            r#"{"map": {"kind": "vortex"}, "grid": {"layout": "polar", "resolution": [8, 8], "x": 0}}"#,
            r#"{"map": {"kind": "vortex"}, "params": {"j": [1, 2, 3]}}"#,
        ] {
            assert!(matches!(RunConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn validation_reports_missing_fields() {
        let c = RunConfig::for_map(MapSpec::Vortex);
        assert!(c.validate(Command::Study).is_err());
        assert!(c.validate(Command::Degree).is_err());
        assert!(c.validate(Command::Area).is_ok());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::for_map(MapSpec::Vortex);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 7;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
