//! Batch front end: every command reads a [`Settings`] map (config file overridden by
//! flags), writes plot-ready CSV and JSON files, and echoes the effective settings into
//! each output.

pub mod commands;
pub mod config;
pub mod scenario;

use std::fmt;

pub use config::{parse_sweep, Settings, Sweep};

/// Bad or missing settings; reported with exit code [`exit::USAGE`].
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    /// Unknown command, flag or setting, or a value that does not parse.
    pub const USAGE: i32 = 2;
    /// Unreadable input, malformed file, unwritable output.
    pub const IO: i32 = 3;
    /// A parameter outside its valid range.
    pub const PARAMETER: i32 = 4;
    /// The data cannot support the requested statistic.
    pub const DATA: i32 = 5;
    /// No brokerage assignment satisfies the constraints.
    pub const BROKERAGE: i32 = 6;
}

/// Exit code for the first classified error in the chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use orderflow_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return exit::USAGE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Parse { .. } | E::Io(_) => exit::IO,
                E::InvalidParameter(_) | E::Range(_) | E::Resolution { .. } => exit::PARAMETER,
                E::EmptyLog
                | E::MissingPriceFlags
                | E::InsufficientData(_)
                | E::Undefined(_)
                | E::Capacity { .. } => exit::DATA,
                E::Feasibility(_) | E::Mapping(_) => exit::BROKERAGE,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return exit::IO;
        }
    }
    exit::OTHER
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn classifies_through_context() {
        let e: anyhow::Result<()> = Err(orderflow_core::Error::Feasibility("x".into())).context("mapping");
        assert_eq!(exit_code(&e.unwrap_err()), exit::BROKERAGE);
        let e = anyhow::Error::new(UsageError("bad".into()));
        assert_eq!(exit_code(&e), exit::USAGE);
        let e = anyhow::Error::new(orderflow_core::Error::MissingPriceFlags);
        assert_eq!(exit_code(&e), exit::DATA);
        let e = anyhow::Error::new(std::io::Error::other("disk"));
        assert_eq!(exit_code(&e), exit::IO);
        assert_eq!(exit_code(&anyhow::anyhow!("?")), exit::OTHER);
    }
}
