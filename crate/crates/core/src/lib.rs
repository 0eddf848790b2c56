//! Group-parity auditing for right-censored time-to-event cohorts.
//!
//! The library stratifies subjects by an algorithmic decision score,
//! estimates per-group no-event curves under right-censoring, compares the
//! groups with a log-rank test per stratum and per follow-up horizon, and
//! calibrates the test's error rates against a built-in structural-model
//! cohort simulator.
//!
//! Modules:
//! - [`survival`] — risk tables, Kaplan-Meier curves, log-rank test,
//!   chi-square tail, horizon sweeps
//! - [`ingest`] — cohort file parsing, column mapping, score quantization
//! - [`sim`] — structural-model cohort generator and error-rate calibration
//! - [`report`] — JSON/CSV/SVG emission of audit results
//!
//! The estimators accumulate in any [`Real`] scalar: `f64` is the
//! workhorse, and exact rationals satisfy the same bounds so arithmetic
//! identities can be checked without rounding.

pub mod error;
pub mod ingest;
pub mod record;
pub mod report;
pub mod scalar;
pub mod sim;
pub mod survival;

pub use error::{Error, Result};
pub use record::{partition_by_stratum, EventRecord, Group, PerGroup, Stratum};
pub use scalar::Real;

/// Double-precision instantiations used by the pipeline and the CLI.
pub type RiskTable64 = survival::RiskTable<f64>;
pub type SurvivalCurve64 = survival::SurvivalCurve<f64>;
pub type LogRankResult64 = survival::LogRankResult<f64>;
pub type TimelinePoint64 = survival::TimelinePoint<f64>;
