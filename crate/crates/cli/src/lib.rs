//! Experiment runner for `wvsim-core`: configuration files, CSV output and
//! the standard figure presets.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod csv;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use run::{run, Command, Output, Preset};

/// Worker count requested through `WVSIM_THREADS`, if any.
pub fn threads_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var("WVSIM_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid {
                key: "WVSIM_THREADS".into(),
                reason: format!("{s:?} is not a positive integer"),
            }),
        },
        Err(_) => Ok(None),
    }
}
