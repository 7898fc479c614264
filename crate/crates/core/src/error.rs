use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A malformed row in an event-log or profile file. `record` counts data rows from 1,
    /// `line` is the physical line in the file.
    #[error("parse error at record {record} (line {line}): {message}")]
    Parse {
        record: usize,
        line: usize,
        message: String,
    },

    #[error("event log is empty")]
    EmptyLog,

    #[error("out of range: {0}")]
    Range(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "pair statistics need {cells} cells, above the cap of {cap}; \
         drop low-activity agents with filter_inactive or raise the cap"
    )]
    Capacity { cells: usize, cap: usize },

    #[error("event log carries no price-change flags")]
    MissingPriceFlags,

    #[error("infeasible brokerage assignment: {0}")]
    Feasibility(String),

    #[error("brokerage map does not cover investor {0}")]
    Mapping(u32),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("significance level {alpha} cannot be resolved with {replicates} replicates")]
    Resolution { alpha: f64, replicates: usize },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
