//! Strict JSON run configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use cs_radial::nonlinearity::SampleSpec;
use cs_radial::nonlocal::PhysicalConstants;
use cs_radial::solver::MinimaxConfig;
use cs_radial::{make_grid, Grading, NonlinearityModel, RadialGrid};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Power { p: f64, omega: f64 },
    /// Samples `(ξ, g(ξ))` on `ξ ≥ 0`; the model is their odd extension.
    CustomTable { samples: Vec<(f64, f64)> },
}

impl ModelConfig {
    pub fn build(&self) -> Result<NonlinearityModel, CliError> {
        let model = match self {
            ModelConfig::Power { p, omega } => NonlinearityModel::power(*p, *omega),
            ModelConfig::CustomTable { samples } => NonlinearityModel::from_table(samples),
        };
        model.map_err(|e| CliError::Config(format!("model: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub r_max: f64,
    pub n: usize,
    #[serde(default = "uniform")]
    pub grading: Grading,
}

fn uniform() -> Grading {
    Grading::Uniform
}

impl GridConfig {
    pub fn build(&self) -> Result<Arc<RadialGrid>, CliError> {
        make_grid(self.r_max, self.n, self.grading).map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QRange {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Value(f64),
    Range(QRange),
}

impl Default for QSpec {
    fn default() -> Self {
        QSpec::Value(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodesSpec {
    One(usize),
    Many(Vec<usize>),
}

impl Default for NodesSpec {
    fn default() -> Self {
        NodesSpec::One(0)
    }
}

impl NodesSpec {
    pub fn list(&self) -> Vec<usize> {
        match self {
            NodesSpec::One(k) => vec![*k],
            NodesSpec::Many(ks) => ks.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    MountainPass,
    #[default]
    NodalShoot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: MinimaxConfig,
    #[serde(default)]
    pub q: QSpec,
    #[serde(default)]
    pub nodes: NodesSpec,
    #[serde(default)]
    pub method: SolveMethod,
    #[serde(default)]
    pub constants: PhysicalConstants,
    /// Profile CSV (`r,value`) for `gauge`; without it the profile is solved for.
    #[serde(default)]
    pub profile: Option<PathBuf>,
    #[serde(default)]
    pub sample: Option<SampleSpec>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.solver.validate().map_err(|e| CliError::Config(format!("solver: {e}")))?;
        cfg.constants
            .validate()
            .map_err(|e| CliError::Config(format!("constants: {e}")))?;
        Ok(cfg)
    }

    pub fn single_q(&self) -> Result<f64, CliError> {
        match self.q {
            QSpec::Value(q) if q.is_finite() && q >= 0.0 => Ok(q),
            QSpec::Value(q) => Err(CliError::Config(format!("q must be a nonnegative number, got {q}"))),
            QSpec::Range(_) => Err(CliError::Config("this command needs a single q, not a range".into())),
        }
    }

    pub fn q_range(&self) -> Result<QRange, CliError> {
        match self.q {
            QSpec::Range(r) => Ok(r),
            QSpec::Value(_) => Err(CliError::Config("sweep needs q = {start, end, steps}".into())),
        }
    }
}
