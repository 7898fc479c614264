//! Order-flow persistence analysis.
//!
//! The autocorrelation of market-order signs is split exactly into a part produced by
//! the same agent trading repeatedly in one direction (order splitting) and a part
//! produced by different agents trading in the same direction (herding). Around that
//! decomposition the crate provides generative investor models, brokerage maps that
//! aggregate investors into exchange members, and the statistics used to compare
//! observed logs with those models.
//!
//! - [`event_model`]: event logs, CSV ingestion/export, activity summaries.
//! - [`decomposition`]: `C(τ)`, pair statistics, `C_split`/`C_herd`, conditional variants.
//! - [`simulators`]: metaorder splitting, public-information herding, network imitation.
//! - [`brokerage`]: fixed, dynamically random and network-correlated broker assignment.
//! - [`stats`]: shuffle tests, conditional same-sign probabilities, power-law fits,
//!   rank correlation, closed-form predictions, an anti-herding fixture.

pub mod brokerage;
pub mod decomposition;
pub mod error;
pub mod event_model;
pub mod rng;
pub mod simulators;
pub mod stats;

pub use error::{Error, Result};
