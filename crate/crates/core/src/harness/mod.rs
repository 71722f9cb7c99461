//! Experiment runner: TOML configs, presets, seed sweeps, CSV output and the
//! verification suite.

pub mod config;
pub mod experiment;
pub mod plotdata;
pub mod presets;
pub mod verify;

pub use config::{ExperimentConfig, FeedbackKind, GameKind, InitKind, LearnerConfig, Overrides};
pub use experiment::{run_experiment, simulate, ExperimentReport};
pub use plotdata::emit_plotdata;
pub use presets::{preset, Scale, PRESET_NAMES};
pub use verify::{verify_suite, Level, VerifyReport};
