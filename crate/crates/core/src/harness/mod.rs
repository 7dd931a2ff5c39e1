//! Declarative experiment runner: TOML configs, a preset registry and JSON/CSV reports.

mod config;
mod presets;
mod report;
mod run;

pub use config::{
    ConfigError, ExperimentConfig, ExperimentKind, ExperimentParams, McSpec, ModelSpec,
    NumericConfig, OutputFormat, OutputSpec, TripletSpec, OUTPUT_DIR_ENV,
};
pub use presets::{
    bounded_product, build_measure, build_model, build_triplet, default_model, default_triplet,
    list_presets, smooth_symmetric, BuiltModel, DerivativeModel, DualityModel, EquationModel,
    Family, FubiniFn, PresetCategory, PresetInfo,
};
pub use report::{
    write_atomic, Comparison, Metric, RunReport, LIBRARY_VERSION, METRIC_COLUMNS, PATH_COLUMNS,
    SCHEMA_VERSION,
};
pub use run::{prepare, random_smooth_integrand, run, run_prepared, Prepared};
