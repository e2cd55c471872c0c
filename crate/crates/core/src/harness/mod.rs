//! Experiment configuration, orchestration and report emission for the CLI.

pub mod calibrate;
pub mod config;
pub mod experiments;
pub mod report;

pub use calibrate::{load_constants, run_calibrate, save_constants, ConstantsFile};
pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::run;
pub use report::{OutputFormat, Report};
