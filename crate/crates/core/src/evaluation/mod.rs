//! Experiment harness: Q-unbalanced assembly, repeated splits, metrics,
//! sweeps and report tables.

pub mod assemble;
pub mod metrics;
pub mod profiling;
pub mod report;
pub mod sweeps;

pub use assemble::{assemble, stratified_split};
pub use metrics::{compute_metrics, Confusion, Metrics, METRIC_NAMES};
pub use profiling::{
    profiling_split, run_profiling, ExperimentConfig, MetricsReport, SelectionMode, DEFAULT_NOF,
};
pub use report::{config_hash, ReportEntry, ReportTable, RunManifest, RunStatus};
pub use sweeps::{
    compare_legacy, sweep_degradation, sweep_nof, sweep_q, sweep_train_size, DegradationSpec,
    TrainSizeSpec, NOF_LIST, Q_LIST, TRAIN_SIZES,
};
