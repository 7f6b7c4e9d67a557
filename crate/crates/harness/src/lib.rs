//! Config-driven experiments on top of `polyscat-core`: validation, forward
//! solves, CGO verification tables, uniqueness sweeps, corner probes and
//! passive point-source comparisons.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use commands::{
    cmd_cgo_verify, cmd_forward, cmd_passive, cmd_probe, cmd_sweep, cmd_validate, RunOptions,
};
pub use error::HarnessError;
pub use report::{Report, Status};
