//! Scores, significance tests, baselines and experiment drivers.

pub mod baselines;
pub mod experiment;
pub mod metrics;
pub mod report;
pub mod stats;
pub mod synthetic;

pub use baselines::{dense_mlp, persistence_forecast, LinearRegression};
pub use experiment::{fit_variant, prepare_tabular, run_tabular_experiment, AblationSpec, Grid, PreparedTabular, TabularConfig, TabularRun, VariantResult};
pub use metrics::{corr_metric, quantile, r2_score, rse, MetricReport, Summary};
pub use report::{config_hash, forecast_table, tabular_table, ForecastEntry, RunManifest, Table, MANIFEST_SCHEMA_VERSION};
pub use stats::{paired_t_test, significance_marker, TTest};
