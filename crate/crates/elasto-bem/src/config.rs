//! Run configuration.
//!
//! A TOML file with the tables below. Every key is optional; the values shown
//! are the defaults. Keys outside this list are rejected.
//!
//! ```toml
//! [geometry]
//! builtin = "icosphere"   # "icosphere", "cube" or "circle"
//! level = 2               # icosphere refinements; cube 2^level facets per face edge;
//!                         # circle 2^level segments (default 6 for the circle)
//! scale = 1.0             # multiplies the builtin coordinates (unit sphere, cube [-1/2, 1/2]³, unit circle)
//! # msh = "surface.msh"   # surface file instead of a builtin
//!
//! [physics]
//! omega = 1.0
//! rho = 1.0
//! mu = 1.0
//! lambda = 2.0
//!
//! [discretization]
//! singular_order = 5      # Gauss points per direction for touching panel pairs
//! near_degree = 10        # triangle rule degrees for separated pairs by distance tier
//! mid_degree = 8
//! far_degree = 6
//! eval_degree = 10        # off-surface evaluation
//! eta = 2.0               # near-singular subdivision threshold
//! log_order = 10          # 2D graded log rule: points per interval
//! log_levels = 12         # 2D graded log rule: levels
//!
//! [task]
//! levels = [2]            # refinement levels; defaults to [geometry.level]
//! offsets = [0.0625, 0.125, 0.25]   # jump-check offsets as fractions of the longest edge
//! radii = [3.0]           # evaluation radii (scaled with geometry.scale)
//! source = [0.1, 0.0, 0.05]         # interior point source of the representation check
//! elements = []           # elements sampled by the jump check; empty picks four spread out
//! operators = []          # assemble task; empty picks a default set for the dimension
//! samples = 20            # random field pairs for the symmetry identity
//! seed = 1
//! tolerance = 0.0         # 0 means the per-task default
//! min_rate = 1.0          # observed rate required when two or more levels are run
//!
//! [output]
//! formats = ["csv", "matrix"]       # any of "csv", "json", "matrix"
//! ```

use std::path::{Path, PathBuf};

use elasto_bem_core::kernels::WaveParams;
use elasto_bem_core::quadrature::QuadOptions;
use elasto_bem_core::elastic2d::CurveQuad;
use serde::{Deserialize, Serialize};

/// Allowed keys per table.
pub const KEYS: &[(&str, &[&str])] = &[
    ("geometry", &["builtin", "level", "scale", "msh"]),
    ("physics", &["omega", "rho", "mu", "lambda"]),
    (
        "discretization",
        &[
            "singular_order",
            "near_degree",
            "mid_degree",
            "far_degree",
            "eval_degree",
            "eta",
            "log_order",
            "log_levels",
        ],
    ),
    (
        "task",
        &[
            "levels",
            "offsets",
            "radii",
            "source",
            "elements",
            "operators",
            "samples",
            "seed",
            "tolerance",
            "min_rate",
        ],
    ),
    ("output", &["formats"]),
];

pub const FORMATS: [&str; 3] = ["csv", "json", "matrix"];

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {msg}")]
    Invalid { key: String, msg: String },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn invalid(key: &str, msg: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Icosphere,
    Cube,
    Circle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub builtin: Builtin,
    pub level: Option<usize>,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msh: Option<PathBuf>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            builtin: Builtin::Icosphere,
            level: None,
            scale: 1.0,
            msh: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub omega: f64,
    pub rho: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        PhysicsConfig {
            omega: 1.0,
            rho: 1.0,
            mu: 1.0,
            lambda: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub singular_order: usize,
    pub near_degree: usize,
    pub mid_degree: usize,
    pub far_degree: usize,
    pub eval_degree: usize,
    pub eta: f64,
    pub log_order: usize,
    pub log_levels: usize,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        let q = QuadOptions::default();
        let c = CurveQuad::default();
        DiscretizationConfig {
            singular_order: q.singular_order,
            near_degree: q.near_degree,
            mid_degree: q.mid_degree,
            far_degree: q.far_degree,
            eval_degree: q.eval_degree,
            eta: q.eta,
            log_order: c.log_order,
            log_levels: c.log_levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskConfig {
    pub levels: Vec<usize>,
    pub offsets: Vec<f64>,
    pub radii: Vec<f64>,
    pub source: [f64; 3],
    pub elements: Vec<usize>,
    pub operators: Vec<String>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub min_rate: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            levels: Vec::new(),
            offsets: elasto_bem_core::elastic3d::JUMP_OFFSETS.to_vec(),
            radii: vec![3.0],
            source: [0.1, 0.0, 0.05],
            elements: Vec::new(),
            operators: Vec::new(),
            samples: 20,
            seed: 1,
            tolerance: 0.0,
            min_rate: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            formats: vec!["csv".into(), "matrix".into()],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    pub discretization: DiscretizationConfig,
    pub task: TaskConfig,
    pub output: OutputConfig,
}

/// Names every key of `table` that is not in [`KEYS`].
fn check_keys(table: &toml::Table) -> Result<(), ConfigError> {
    for (section, value) in table {
        let Some((_, allowed)) = KEYS.iter().find(|(s, _)| s == section) else {
            return Err(ConfigError::UnknownKey(section.clone()));
        };
        let Some(inner) = value.as_table() else {
            return Err(ConfigError::invalid(section, "expected a table"));
        };
        for key in inner.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(format!("{section}.{key}")));
            }
        }
    }
    Ok(())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        check_keys(&table)?;
        let mut cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Config::parse(&text)?;
        // a relative mesh path is taken relative to the config file
        if let (Some(m), Some(dir)) = (&cfg.geometry.msh, path.parent()) {
            if m.is_relative() {
                cfg.geometry.msh = Some(dir.join(m));
            }
        }
        Ok(cfg)
    }

    /// Fills the defaults that depend on other keys.
    fn resolve(&mut self) {
        if self.geometry.level.is_none() {
            self.geometry.level = Some(match self.geometry.builtin {
                Builtin::Circle => 6,
                _ => 2,
            });
        }
        if self.task.levels.is_empty() {
            self.task.levels = vec![self.level()];
        }
    }

    pub fn level(&self) -> usize {
        self.geometry.level.unwrap_or(2)
    }

    /// `true` when the geometry is a curve.
    pub fn planar(&self) -> bool {
        self.geometry.msh.is_none() && self.geometry.builtin == Builtin::Circle
    }

    pub fn params(&self) -> Result<WaveParams, ConfigError> {
        let p = &self.physics;
        WaveParams::new(p.omega, p.rho, p.mu, p.lambda)
            .map_err(|e| ConfigError::invalid(&format!("physics.{}", e.key()), e.to_string()))
    }

    pub fn quad(&self) -> QuadOptions {
        let d = &self.discretization;
        QuadOptions {
            singular_order: d.singular_order,
            near_degree: d.near_degree,
            mid_degree: d.mid_degree,
            far_degree: d.far_degree,
            eval_degree: d.eval_degree,
            eta: d.eta,
            ..QuadOptions::default()
        }
    }

    pub fn curve_quad(&self) -> CurveQuad {
        CurveQuad {
            log_order: self.discretization.log_order,
            log_levels: self.discretization.log_levels,
            ..CurveQuad::default()
        }
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        let g = &self.geometry;
        if !(g.scale > 0.0 && g.scale.is_finite()) {
            return Err(ConfigError::invalid("geometry.scale", "must be positive"));
        }
        let max_level = match g.builtin {
            Builtin::Icosphere => 6,
            Builtin::Cube => 5,
            Builtin::Circle => 14,
        };
        let min_level = if g.builtin == Builtin::Circle { 2 } else { 0 };
        for &l in self.task.levels.iter().chain([self.level()].iter()) {
            if l < min_level || l > max_level {
                return Err(ConfigError::invalid(
                    "geometry.level",
                    format!("level {l} outside {min_level}..={max_level} for {:?}", g.builtin),
                ));
            }
        }
        if g.msh.is_some() && self.task.levels.len() > 1 {
            return Err(ConfigError::invalid("task.levels", "a mesh file has a single level"));
        }
        let d = &self.discretization;
        for (key, v) in [
            ("near_degree", d.near_degree),
            ("mid_degree", d.mid_degree),
            ("far_degree", d.far_degree),
            ("eval_degree", d.eval_degree),
        ] {
            if !(1..=20).contains(&v) {
                return Err(ConfigError::invalid(&format!("discretization.{key}"), "must be in 1..=20"));
            }
        }
        for (key, v) in [
            ("singular_order", d.singular_order),
            ("log_order", d.log_order),
            ("log_levels", d.log_levels),
        ] {
            if !(1..=64).contains(&v) {
                return Err(ConfigError::invalid(&format!("discretization.{key}"), "must be in 1..=64"));
            }
        }
        if !(d.eta > 0.0 && d.eta.is_finite()) {
            return Err(ConfigError::invalid("discretization.eta", "must be positive"));
        }
        let t = &self.task;
        let distinct = t.offsets.iter().enumerate().all(|(i, a)| !t.offsets[..i].contains(a));
        if t.offsets.is_empty() || !distinct || t.offsets.iter().any(|&o| !(o > 0.0 && o < 1.0)) {
            return Err(ConfigError::invalid("task.offsets", "need distinct values in (0, 1)"));
        }
        if t.radii.is_empty() || t.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(ConfigError::invalid("task.radii", "need positive values"));
        }
        if t.source.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::invalid("task.source", "must be finite"));
        }
        if !(t.tolerance >= 0.0) {
            return Err(ConfigError::invalid("task.tolerance", "must be non-negative"));
        }
        if !t.min_rate.is_finite() {
            return Err(ConfigError::invalid("task.min_rate", "must be finite"));
        }
        if t.samples == 0 {
            return Err(ConfigError::invalid("task.samples", "must be positive"));
        }
        let known = if self.planar() {
            crate::tasks::CURVE_OPERATORS
        } else {
            crate::tasks::SURFACE_OPERATORS
        };
        if let Some(op) = t.operators.iter().find(|o| !known.contains(&o.as_str())) {
            return Err(ConfigError::invalid(
                "task.operators",
                format!("unknown operator '{op}', expected one of {}", known.join(", ")),
            ));
        }
        if let Some(f) = self.output.formats.iter().find(|f| !FORMATS.contains(&f.as_str())) {
            return Err(ConfigError::invalid(
                "output.formats",
                format!("unknown format '{f}', expected one of {}", FORMATS.join(", ")),
            ));
        }
        Ok(())
    }

    /// The effective configuration with every default filled in.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
