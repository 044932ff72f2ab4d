//! Experiment harness: configurations, presets, grid sweeps against truth
//! solves, and CSV/SVG reports.

pub mod config;
pub mod error;
pub mod grid;
pub mod run;
pub mod svg;

pub use config::{preset, ExperimentConfig, Method, NormKind, PreconditionerKind, RunSpec, Tier, WeightKind, PRESETS};
pub use error::{BenchError, Result};
pub use krb_core::rkbm::{export_model, import_model};
pub use run::{report_dir, run_experiment, ExperimentReport, RunResult, Setup, TruthSolver};
