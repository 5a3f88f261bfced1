//! Benchmark harness: configuration, the extragradient baseline, experiment
//! dispatch, CSV traces and plots.

pub mod config;
pub mod csv_io;
pub mod eg;
pub mod experiment;
#[cfg(feature = "plot")]
pub mod plot;

pub use config::{Algorithm, ExperimentConfig, ProblemKind, ScheduleKind};
pub use csv_io::{emit_csv, parse_csv, read_csv, write_csv, RunTrace};
pub use eg::{eg_baseline, eg_step};
#[cfg(feature = "parallel")]
pub use experiment::limit_threads;
pub use experiment::{execute, run_experiment, run_single, ExperimentOutput};
#[cfg(feature = "plot")]
pub use plot::emit_plot;
