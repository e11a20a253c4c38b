//! Configuration, experiment orchestration, figure reproduction and report
//! emission.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod report;

pub use config::{ExperimentConfig, ModelConfig, OutputConfig, SchemeName, SweepConfig, SweepParameter, Tolerances};
pub use experiment::{run_experiment, snr_to_noise_var, write_outputs, ExperimentOutput};
pub use figures::{reproduce_figure, FigureId, FigureOptions, FigureOutput};
pub use report::{Report, SweepRow, Verdict, SCHEMA_VERSION};
