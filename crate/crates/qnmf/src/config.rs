//! Run configuration: a single TOML file with one section per command.
//!
//! Sections are optional; each command requires its own section (plus
//! `[solver]` for `factorize`). Command-line overrides are applied after
//! parsing. Validation reports the dotted path of the offending field.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::quat::Quaternion;
use crate::solver::SolverConfig;
use crate::synth::{InstanceParams, PolarizationRegime};

/// Configuration error with the dotted path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn default_true() -> bool {
    true
}

fn default_polarization() -> String {
    "full".to_string()
}

fn default_max_iters() -> usize {
    300
}

fn default_stop_delta() -> f64 {
    1e-5
}

fn default_restarts() -> usize {
    1
}

/// `[generate]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    #[serde(default)]
    pub seed: u64,
    pub num_bands: usize,
    /// `(height, width)` of the activation grid.
    pub grid: [usize; 2],
    pub num_sources: usize,
    /// `"full"`, `"partial"` or `"none"`; ignored when explicit `sources`
    /// are given.
    #[serde(default = "default_polarization")]
    pub polarization: String,
    /// Degree-of-polarization range for the `"partial"` regime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dop_range: Option<[f64; 2]>,
    /// Explicit constant polarization states, one per source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<SourceStateConfig>>,
    #[serde(default = "default_true")]
    pub ensure_pure_pixels: bool,
    #[serde(default)]
    pub activation_floor: f64,
    #[serde(default)]
    pub noise_sigma: f64,
}

/// One explicit constant polarization state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceStateConfig {
    /// Degree of polarization in `[0, 1]`.
    pub dop: f64,
    /// Axis `(i, j, k)` components; normalized at use.
    pub axis: [f64; 3],
}

/// `[solver]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub rank: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_stop_delta")]
    pub stop_delta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub gram_ridge: f64,
}

/// `[factorize]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorizeSection {
    /// Stokes table with the data matrix.
    pub input: PathBuf,
    /// Project slightly infeasible input entries onto the cone instead of
    /// rejecting them.
    #[serde(default)]
    pub project_input: bool,
}

/// `[uniqueness]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessSection {
    pub w: PathBuf,
    pub h: PathBuf,
    /// Also write the transformed source tables at the admissible
    /// interval endpoints.
    #[serde(default)]
    pub emit_envelopes: bool,
}

/// `[evaluate]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateSection {
    pub est_w: PathBuf,
    pub est_h: PathBuf,
    pub truth_w: PathBuf,
    pub truth_h: PathBuf,
}

/// `[project]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSection {
    /// Stokes table to project entry-wise onto the cone.
    pub input: PathBuf,
}

/// Whole-run configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Output directory; `--out` overrides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GenerateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorize: Option<FactorizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniqueness: Option<UniquenessSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluate: Option<EvaluateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<ProjectSection>,
}

impl RunConfig {
    /// Parse and validate a config file.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let contents = fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        let config: RunConfig = toml::from_str(&contents)
            .map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(g) = &self.generate {
            g.validate()?;
        }
        if let Some(s) = &self.solver {
            s.validate()?;
        }
        Ok(())
    }
}

impl GenerateConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.num_bands == 0 {
            return Err(ConfigError::new("generate.num_bands", "must be positive"));
        }
        if self.grid[0] == 0 || self.grid[1] == 0 {
            return Err(ConfigError::new("generate.grid", "grid must be non-empty"));
        }
        if self.num_sources == 0 {
            return Err(ConfigError::new("generate.num_sources", "must be positive"));
        }
        if !matches!(self.polarization.as_str(), "full" | "partial" | "none") {
            return Err(ConfigError::new(
                "generate.polarization",
                format!(
                    "'{}' is not one of 'full', 'partial', 'none'",
                    self.polarization
                ),
            ));
        }
        if let Some([lo, hi]) = self.dop_range {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(ConfigError::new(
                    "generate.dop_range",
                    format!("[{lo}, {hi}] is not an ascending range inside [0, 1]"),
                ));
            }
        }
        if let Some(sources) = &self.sources {
            if sources.len() != self.num_sources {
                return Err(ConfigError::new(
                    "generate.sources",
                    format!(
                        "{} states for {} sources",
                        sources.len(),
                        self.num_sources
                    ),
                ));
            }
            for (i, s) in sources.iter().enumerate() {
                if !(0.0..=1.0).contains(&s.dop) {
                    return Err(ConfigError::new(
                        format!("generate.sources[{i}].dop"),
                        format!("{} outside [0, 1]", s.dop),
                    ));
                }
                if s.dop > 0.0 && s.axis.iter().all(|c| *c == 0.0) {
                    return Err(ConfigError::new(
                        format!("generate.sources[{i}].axis"),
                        "axis must be nonzero for a polarized source",
                    ));
                }
            }
        }
        if self.activation_floor < 0.0 {
            return Err(ConfigError::new(
                "generate.activation_floor",
                format!("must be non-negative, got {}", self.activation_floor),
            ));
        }
        if self.noise_sigma < 0.0 {
            return Err(ConfigError::new(
                "generate.noise_sigma",
                format!("must be non-negative, got {}", self.noise_sigma),
            ));
        }
        Ok(())
    }

    /// Instance parameters this section describes.
    pub fn instance_params(&self) -> InstanceParams {
        let polarization = if let Some(sources) = &self.sources {
            PolarizationRegime::ConstantStates(
                sources
                    .iter()
                    .map(|s| {
                        (
                            s.dop,
                            Quaternion::pure(s.axis[0], s.axis[1], s.axis[2]),
                        )
                    })
                    .collect(),
            )
        } else {
            match self.polarization.as_str() {
                "partial" => PolarizationRegime::PartiallyPolarized {
                    dop_range: self
                        .dop_range
                        .map(|[lo, hi]| (lo, hi))
                        .unwrap_or((0.3, 0.9)),
                },
                "none" => PolarizationRegime::Unpolarized,
                _ => PolarizationRegime::FullyPolarized,
            }
        };
        InstanceParams {
            num_bands: self.num_bands,
            grid: (self.grid[0], self.grid[1]),
            num_sources: self.num_sources,
            polarization,
            ensure_pure_pixels: self.ensure_pure_pixels,
            activation_floor: self.activation_floor,
            noise_sigma: self.noise_sigma,
        }
    }
}

impl SolverSection {
    fn validate(&self) -> Result<(), ConfigError> {
        if self.rank == 0 {
            return Err(ConfigError::new("solver.rank", "must be positive"));
        }
        if !(self.stop_delta > 0.0) {
            return Err(ConfigError::new(
                "solver.stop_delta",
                format!("must be positive, got {}", self.stop_delta),
            ));
        }
        if self.gram_ridge < 0.0 {
            return Err(ConfigError::new(
                "solver.gram_ridge",
                format!("must be non-negative, got {}", self.gram_ridge),
            ));
        }
        if self.max_iters == 0 {
            return Err(ConfigError::new("solver.max_iters", "must be positive"));
        }
        if self.restarts == 0 {
            return Err(ConfigError::new("solver.restarts", "must be positive"));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            rank: self.rank,
            max_iters: self.max_iters,
            stop_delta: self.stop_delta,
            seed: self.seed,
            restarts: self.restarts,
            gram_ridge: self.gram_ridge,
        }
    }
}
