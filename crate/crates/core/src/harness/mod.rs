//! Experiment configuration, orchestration and output files.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_config, parse_config, ExperimentConfig, KernelSampling};
pub use experiment::{fitted_order, run_experiment, GridReport, Mode, RunReport, VerdictEntry};
pub use output::{emit_outputs, format_sig12, report_json};
