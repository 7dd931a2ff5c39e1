use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sde::Conditioning;

/// Environment variable that redirects report files to another directory.
pub const OUTPUT_DIR_ENV: &str = "LOCAL_MALLIAVIN_OUTPUT_DIR";

/// A configuration problem, located by its key path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    pub fn field(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError::Field {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Duality,
    ProductFormula,
    Fubini,
    DerivativeCheck,
    MonotoneDrift,
    LocalMonotone,
    Wronskian,
    Density,
    MomentBound,
    Truncation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Duality,
        ExperimentKind::ProductFormula,
        ExperimentKind::Fubini,
        ExperimentKind::DerivativeCheck,
        ExperimentKind::MonotoneDrift,
        ExperimentKind::LocalMonotone,
        ExperimentKind::Wronskian,
        ExperimentKind::Density,
        ExperimentKind::MomentBound,
        ExperimentKind::Truncation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Duality => "duality",
            ExperimentKind::ProductFormula => "product-formula",
            ExperimentKind::Fubini => "fubini",
            ExperimentKind::DerivativeCheck => "derivative-check",
            ExperimentKind::MonotoneDrift => "monotone-drift",
            ExperimentKind::LocalMonotone => "local-monotone",
            ExperimentKind::Wronskian => "wronskian",
            ExperimentKind::Density => "density",
            ExperimentKind::MomentBound => "moment-bound",
            ExperimentKind::Truncation => "truncation",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lévy triplet: a measure preset with parameter overrides plus `γ`, `σ`, `T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletSpec {
    pub measure: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "one")]
    pub horizon: f64,
}

/// Functional or equation preset with parameter overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub preset: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// Kind-specific settings; each kind reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    /// Chaos orders `n` (product formula, moment bound).
    pub orders: Option<Vec<usize>>,
    /// Moment exponents `p`.
    pub powers: Option<Vec<f64>>,
    /// `Θ = {theta_lo < |x| < theta_hi}`; all of `ℝ₀` when absent.
    pub theta_lo: Option<f64>,
    pub theta_hi: Option<f64>,
    /// Random `(path, φ, t)` triples in the derivative check.
    pub n_triples: Option<usize>,
    pub u_panels: Option<usize>,
    /// Truncation levels `m` and the reference level `m'`.
    pub levels: Option<Vec<f64>>,
    pub reference_level: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub epsilon: Option<f64>,
    pub m_bound: Option<f64>,
    /// Simulation truncation of an infinite measure.
    pub truncation: Option<f64>,
    pub conditioning: Option<Conditioning>,
    /// Pass threshold; its meaning depends on the kind.
    pub threshold: Option<f64>,
    pub atom_max: Option<f64>,
    pub atom_min: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "one_u64")]
    pub base_seed: u64,
}

impl Default for McSpec {
    fn default() -> Self {
        Self {
            n_paths: default_paths(),
            base_seed: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericConfig {
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    /// Largest RK4 step; `T/2048` when absent.
    #[serde(default)]
    pub ode_step: Option<f64>,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_fd")]
    pub fd_epsilon: f64,
    #[serde(default = "default_criterion")]
    pub criterion_tol: f64,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            grid_size: default_grid(),
            ode_step: None,
            quad_tol: default_quad_tol(),
            fd_epsilon: default_fd(),
            criterion_tol: default_criterion(),
        }
    }
}

impl NumericConfig {
    /// RK4 steps per horizon implied by `ode_step`.
    pub fn ode_steps(&self, horizon: f64) -> usize {
        match self.ode_step {
            Some(h) => (horizon / h).ceil().max(1.0) as usize,
            None => crate::sde::DEFAULT_STEPS_PER_HORIZON,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// A complete experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Defaults to the model preset's triplet.
    pub triplet: Option<TripletSpec>,
    /// Defaults to the kind's first preset.
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub experiment: ExperimentParams,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// A config with every section at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            triplet: None,
            model: None,
            experiment: ExperimentParams::default(),
            mc: McSpec::default(),
            numeric: NumericConfig::default(),
            output: OutputSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::field("<document>", e.to_string().trim_end()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." {
                "<document>".to_string()
            } else {
                path
            };
            ConfigError::field(path, e.into_inner().message().trim_end())
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// Range checks on the generic sections.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.mc.n_paths == 0 {
            return Err(ConfigError::field("mc.n_paths", "must be positive"));
        }
        if self.mc.base_seed == 0 {
            return Err(ConfigError::field("mc.base_seed", "must be positive"));
        }
        let n = &self.numeric;
        if n.grid_size < 2 {
            return Err(ConfigError::field(
                "numeric.grid_size",
                "need at least two grid nodes",
            ));
        }
        for (name, v) in [
            ("quad_tol", n.quad_tol),
            ("fd_epsilon", n.fd_epsilon),
            ("criterion_tol", n.criterion_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::field(
                    format!("numeric.{name}"),
                    "must be positive",
                ));
            }
        }
        if let Some(h) = n.ode_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::field("numeric.ode_step", "must be positive"));
            }
        }
        if let Some(t) = &self.triplet {
            if !(t.horizon > 0.0 && t.horizon.is_finite()) {
                return Err(ConfigError::field("triplet.horizon", "must be positive"));
            }
            if !(t.sigma >= 0.0 && t.sigma.is_finite()) {
                return Err(ConfigError::field("triplet.sigma", "must be non-negative"));
            }
        }
        let e = &self.experiment;
        for (name, v) in [
            ("epsilon", e.epsilon),
            ("truncation", e.truncation),
            ("threshold", e.threshold),
            ("reference_level", e.reference_level),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError::field(
                        format!("experiment.{name}"),
                        "must be positive",
                    ));
                }
            }
        }
        if e.n_triples == Some(0) {
            return Err(ConfigError::field(
                "experiment.n_triples",
                "must be positive",
            ));
        }
        if let Some(orders) = &e.orders {
            if orders.is_empty() || orders.contains(&0) {
                return Err(ConfigError::field(
                    "experiment.orders",
                    "orders must be positive",
                ));
            }
        }
        if let Some(powers) = &e.powers {
            if powers.is_empty() || powers.iter().any(|p| !(*p >= 1.0)) {
                return Err(ConfigError::field(
                    "experiment.powers",
                    "exponents must be at least 1",
                ));
            }
        }
        Ok(())
    }

    /// Where the report goes, honoring the output-directory override.
    pub fn output_path(&self) -> Option<PathBuf> {
        let dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty());
        let ext = match self.output.format {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        };
        match (&self.output.path, dir) {
            (Some(p), Some(d)) => {
                Some(PathBuf::from(d).join(p.file_name().unwrap_or(p.as_os_str())))
            }
            (Some(p), None) => Some(p.clone()),
            (None, Some(d)) => Some(PathBuf::from(d).join(format!("{}.{ext}", self.kind))),
            (None, None) => None,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_u64() -> u64 {
    1
}

fn default_paths() -> usize {
    10_000
}

fn default_grid() -> usize {
    64
}

fn default_quad_tol() -> f64 {
    1e-10
}

fn default_fd() -> f64 {
    1e-5
}

fn default_criterion() -> f64 {
    crate::malliavin::DEFAULT_CRITERION_TOL
}
