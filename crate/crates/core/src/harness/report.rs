use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use crate::sde::PathRow;

/// Version of the JSON report layout and the CSV column sets.
pub const SCHEMA_VERSION: u32 = 1;
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// CSV header of metric tables.
pub const METRIC_COLUMNS: [&str; 6] =
    ["name", "value", "stderr", "threshold", "comparison", "pass"];
/// CSV header of per-path tables.
pub const PATH_COLUMNS: [&str; 5] = ["seed", "n_jumps", "z_t", "norm_sq", "indicator"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `value ≤ threshold`
    Le,
    /// `value ≥ threshold`
    Ge,
}

impl Comparison {
    fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Metric {
    pub fn le(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, None, threshold, Comparison::Le)
    }

    pub fn ge(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, None, threshold, Comparison::Ge)
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    /// A boolean outcome as a 0/1 metric that must equal one.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::ge(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    fn new(
        name: impl Into<String>,
        value: f64,
        stderr: Option<f64>,
        threshold: f64,
        comparison: Comparison,
    ) -> Self {
        // NaN fails either way.
        let pass = match comparison {
            Comparison::Le => value <= threshold,
            Comparison::Ge => value >= threshold,
        };
        Self {
            name: name.into(),
            value,
            stderr,
            threshold,
            comparison,
            pass,
        }
    }
}

/// Outcome of one `run`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub library_version: String,
    pub kind: ExperimentKind,
    /// The configuration with defaults filled in.
    pub config: ExperimentConfig,
    pub metrics: Vec<Metric>,
    /// Kind-specific summary.
    pub details: serde_json::Value,
    pub pass: bool,
    /// Set when the run stopped on a numerical error.
    pub failure: Option<String>,
    pub wall_clock_seconds: f64,
    #[serde(skip)]
    pub rows: Vec<PathRow>,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            library_version: LIBRARY_VERSION.to_string(),
            kind: config.kind,
            config,
            metrics: Vec::new(),
            details: serde_json::Value::Null,
            pass: false,
            failure: None,
            wall_clock_seconds: 0.0,
            rows: Vec::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// 0 on pass, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Per-path rows when the experiment has them, the metric table otherwise.
    /// Contains no timing, so it is reproducible byte for byte.
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(METRIC_COLUMNS).unwrap();
            for m in &self.metrics {
                let stderr = m.stderr.map(|s| s.to_string()).unwrap_or_default();
                w.write_record([
                    m.name.as_str(),
                    &m.value.to_string(),
                    &stderr,
                    &m.threshold.to_string(),
                    m.comparison.symbol(),
                    if m.pass { "true" } else { "false" },
                ])
                .unwrap();
            }
        } else {
            w.write_record(PATH_COLUMNS).unwrap();
            for r in &self.rows {
                w.serialize(r).unwrap();
            }
        }
        w.into_inner().expect("in-memory writer")
    }

    pub fn render(&self, format: OutputFormat) -> Vec<u8> {
        match format {
            OutputFormat::Json => self.to_json().into_bytes(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    /// Writes to a sibling temporary file and renames it into place.
    pub fn write(&self, path: &Path, format: OutputFormat) -> io::Result<()> {
        write_atomic(path, &self.render(format))
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let tmp = path.with_file_name(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
