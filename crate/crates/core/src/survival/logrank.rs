//! Two-group log-rank test over one stratum's censored follow-up records,
//! plus horizon truncation and the per-horizon p-value series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::EventRecord;
use crate::scalar::Real;
use crate::survival::chi2::chi_square_sf;
use crate::survival::risk_table::build_risk_table;

/// Log-rank test outcome for one stratum.
///
/// The statistic accumulates the observed-minus-expected majority events
/// over all event times and normalizes by the hypergeometric variance
///
/// ```text
/// Var = sum_t  N_maj,t * N_min,t * O_t * (N_t - O_t) / (N_t^2 * (N_t - 1))
/// ```
///
/// Event times where only one subject is at risk contribute zero variance
/// (a single draw has none). When the total variance is zero the result is
/// flagged `degenerate` and reported as chi-square 0, p-value 1, so horizon
/// sweeps stay total functions of the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRankResult<S> {
    pub chi_square: S,
    pub variance: S,
    pub p_value: f64,
    pub observed_majority: u64,
    pub expected_majority: S,
    /// Always 1 for the two-group test.
    pub dof: u32,
    pub n_events_total: u64,
    pub n_subjects: u64,
    pub degenerate: bool,
}

/// Run the log-rank test on one stratum's cohort.
///
/// Errors: `EmptyCohort`, `SingleGroup`, `MixedStrata`, and `NoEvents` when
/// every record is censored.
pub fn logrank<S: Real>(records: &[EventRecord]) -> Result<LogRankResult<S>> {
    let table = build_risk_table::<S>(records)?;
    if table.rows.is_empty() {
        return Err(Error::NoEvents);
    }

    let mut diff = S::zero(); // O_majority - E_majority, accumulated
    let mut expected_majority = S::zero();
    let mut variance = S::zero();
    for row in &table.rows {
        // O_maj - E_maj rewritten as (O_maj*N_min - O_min*N_maj) / N: the
        // products are exact integers, so swapping the group labels negates
        // every term exactly and the squared statistic is invariant to the
        // last bit.
        let term = (S::from_count(row.events.majority) * S::from_count(row.n_at_risk.minority)
            - S::from_count(row.events.minority) * S::from_count(row.n_at_risk.majority))
            / S::from_count(row.n_at_risk_total);
        diff = diff + term;
        expected_majority = expected_majority + row.expected.majority.clone();
        if row.n_at_risk_total > 1 {
            let n = S::from_count(row.n_at_risk_total);
            let term = S::from_count(row.n_at_risk.majority)
                * S::from_count(row.n_at_risk.minority)
                * S::from_count(row.events_total)
                * S::from_count(row.n_at_risk_total - row.events_total)
                / (n.clone() * n.clone() * S::from_count(row.n_at_risk_total - 1));
            variance = variance + term;
        }
    }

    let degenerate = variance.is_zero();
    let chi_square = if degenerate {
        S::zero()
    } else {
        diff.clone() * diff / variance.clone()
    };
    let p_value = if degenerate {
        1.0
    } else {
        chi_square_sf(chi_square.approx_f64())?
    };

    Ok(LogRankResult {
        chi_square,
        variance,
        p_value,
        observed_majority: table.n_events.majority,
        expected_majority,
        dof: 1,
        n_events_total: table.n_events_total(),
        n_subjects: table.n_subjects_total(),
        degenerate,
    })
}

/// Administrative truncation: any record observed past `horizon` is
/// re-censored at the horizon; records at or before it are unchanged
/// (boundary inclusive).
pub fn truncate_at_horizon(records: &[EventRecord], horizon: u32) -> Result<Vec<EventRecord>> {
    if horizon == 0 {
        return Err(Error::NonPositiveHorizon);
    }
    Ok(records
        .iter()
        .map(|r| {
            if r.time > horizon {
                EventRecord {
                    time: horizon,
                    event: false,
                    ..r.clone()
                }
            } else {
                r.clone()
            }
        })
        .collect())
}

/// Evidence band for a p-value, with the thresholds fixed at 0.05 and 0.1,
/// upper-inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignificanceBand {
    /// p > 0.1
    Insufficient,
    /// 0.05 < p <= 0.1
    Marginal,
    /// p <= 0.05
    Significant,
}

impl fmt::Display for SignificanceBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignificanceBand::Insufficient => "insufficient",
            SignificanceBand::Marginal => "marginal",
            SignificanceBand::Significant => "significant",
        })
    }
}

impl FromStr for SignificanceBand {
    type Err = Error;

    fn from_str(s: &str) -> Result<SignificanceBand> {
        match s {
            "insufficient" => Ok(SignificanceBand::Insufficient),
            "marginal" => Ok(SignificanceBand::Marginal),
            "significant" => Ok(SignificanceBand::Significant),
            other => Err(Error::InvalidMapping(format!("unknown band `{other}`"))),
        }
    }
}

/// Band a p-value. Errors with `OutOfRange` outside [0, 1].
pub fn classify(p: f64) -> Result<SignificanceBand> {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(p));
    }
    Ok(if p <= 0.05 {
        SignificanceBand::Significant
    } else if p <= 0.1 {
        SignificanceBand::Marginal
    } else {
        SignificanceBand::Insufficient
    })
}

/// One horizon's entry in the p-value series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimelinePoint<S> {
    pub horizon: u32,
    pub result: LogRankResult<S>,
    pub band: SignificanceBand,
}

/// Log-rank test at each follow-up horizon: each element is the test run on
/// the cohort administratively truncated at that horizon.
///
/// Horizons before the first event (trivially no events after truncation)
/// are reported as degenerate results with p = 1 and band `insufficient`
/// rather than failing, so the series is total over the grid. `SingleGroup`
/// still propagates: no horizon can repair a one-group cohort.
pub fn pvalue_timeline<S: Real>(
    records: &[EventRecord],
    horizons: &[u32],
) -> Result<Vec<TimelinePoint<S>>> {
    if horizons.contains(&0) {
        return Err(Error::NonPositiveHorizon);
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::HorizonsNotIncreasing);
    }

    let mut points = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let truncated = truncate_at_horizon(records, horizon)?;
        let result = match logrank::<S>(&truncated) {
            Ok(res) => res,
            Err(Error::NoEvents) => LogRankResult {
                chi_square: S::zero(),
                variance: S::zero(),
                p_value: 1.0,
                observed_majority: 0,
                expected_majority: S::zero(),
                dof: 1,
                n_events_total: 0,
                n_subjects: records.len() as u64,
                degenerate: true,
            },
            Err(e) => return Err(e),
        };
        let band = classify(result.p_value)?;
        points.push(TimelinePoint {
            horizon,
            result,
            band,
        });
    }
    Ok(points)
}

/// Default horizon grid: weekly from day 28 up to the maximum observed
/// time. Cohorts whose follow-up ends before day 28 get a single horizon at
/// the maximum time.
pub fn default_horizon_grid(records: &[EventRecord]) -> Vec<u32> {
    let max_time = records.iter().map(|r| r.time).max().unwrap_or(0);
    if max_time == 0 {
        return Vec::new();
    }
    if max_time < 28 {
        return vec![max_time];
    }
    (28..=max_time).step_by(7).collect()
}
