//! Experiment presets, diagnostics and CSV output for the ECAV DG solver.

pub mod config;
pub mod experiment;
pub mod lemmas;
pub mod output;
pub mod schlieren;
pub mod study;

pub use config::ExperimentConfig;
pub use experiment::{run_experiment, DiagnosticsRecord, RunOutput, Sample};
