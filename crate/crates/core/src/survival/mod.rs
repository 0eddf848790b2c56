//! Censoring-aware estimation and hypothesis testing: risk tables,
//! Kaplan-Meier curves, the two-group log-rank statistic, its chi-square
//! tail probability, horizon truncation and time-resolved p-value series.
//!
//! All operations are pure functions of their inputs and generic over the
//! accumulation scalar (see [`crate::scalar::Real`]).

mod chi2;
mod km;
mod logrank;
mod risk_table;

pub use chi2::{chi_square_sf, erfc};
pub use km::{kaplan_meier, CurveLabel, CurveStep, SurvivalCurve};
pub use logrank::{
    classify, default_horizon_grid, logrank, pvalue_timeline, truncate_at_horizon, LogRankResult,
    SignificanceBand, TimelinePoint,
};
pub use risk_table::{build_risk_table, RiskTable, RiskTableRow};
