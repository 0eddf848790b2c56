//! Audit output serialization: a machine-readable JSON report, long-format
//! CSV files for curves and p-value series, and a deterministic two-panel
//! SVG per stratum.
//!
//! All numbers are rounded to 12 significant digits when the report is
//! built, and every band is classified from the rounded p-value, so
//! re-deriving bands from any emitted file reproduces the emitted bands
//! exactly.

mod svg;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ingest::CohortSummary;
use crate::record::{Group, PerGroup, Stratum};
use crate::survival::{classify, LogRankResult, SignificanceBand, SurvivalCurve, TimelinePoint};

pub use svg::render_svg;

pub const SCHEMA_VERSION: u32 = 1;
const SIG_DIGITS: i32 = 12;

/// Round to 12 significant digits; report values pass through this exactly
/// once, at construction.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(SIG_DIGITS - 1 - magnitude);
    (x * factor).round() / factor
}

/// Run-level context for an audit report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub schema_version: u32,
    pub tool_version: String,
    pub dataset_id: String,
    #[serde(default)]
    pub preset: Option<String>,
    pub quantizer: String,
    pub alpha: f64,
    pub horizon_grid: Vec<u32>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub rng_algorithm: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub time_days: u32,
    pub survival: f64,
    pub n_at_risk: u64,
    pub n_events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCurve {
    pub group: Group,
    pub points: Vec<CurvePoint>,
}

impl ReportCurve {
    fn from_curve(curve: &SurvivalCurve<f64>) -> ReportCurve {
        ReportCurve {
            group: curve.label.group,
            points: curve
                .steps
                .iter()
                .map(|s| CurvePoint {
                    time_days: s.time,
                    survival: round_sig(s.survival),
                    n_at_risk: s.n_at_risk,
                    n_events: s.n_events,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub chi_square: f64,
    pub variance: f64,
    pub p_value: f64,
    pub observed_majority: u64,
    pub expected_majority: f64,
    pub dof: u32,
    pub n_events_total: u64,
    pub n_subjects: u64,
    pub degenerate: bool,
}

impl TestSummary {
    fn from_result(r: &LogRankResult<f64>) -> TestSummary {
        TestSummary {
            chi_square: round_sig(r.chi_square),
            variance: round_sig(r.variance),
            p_value: round_sig(r.p_value),
            observed_majority: r.observed_majority,
            expected_majority: round_sig(r.expected_majority),
            dof: r.dof,
            n_events_total: r.n_events_total,
            n_subjects: r.n_subjects,
            degenerate: r.degenerate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimelineEntry {
    pub horizon_days: u32,
    pub chi_square: f64,
    pub p_value: f64,
    pub band: SignificanceBand,
    pub degenerate: bool,
}

/// Subject counts for one stratum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StratumCounts {
    pub majority: u64,
    pub minority: u64,
    pub events: u64,
    pub censored: u64,
}

/// Everything the audit produced for one stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumBlock {
    pub stratum: String,
    pub counts: StratumCounts,
    pub curves: Vec<ReportCurve>,
    /// Log-rank result over the whole follow-up; absent when the stratum
    /// cannot be tested (see `note`).
    #[serde(default)]
    pub full_period: Option<TestSummary>,
    #[serde(default)]
    pub note: Option<String>,
    pub timeline: Vec<TimelineEntry>,
    /// Earliest horizon whose band is `significant`, if any.
    #[serde(default)]
    pub first_significant_horizon: Option<u32>,
}

impl StratumBlock {
    /// Assemble a block from the per-stratum audit pieces, rounding every
    /// number and classifying bands from the rounded p-values.
    pub fn new(
        stratum: &Stratum,
        counts: StratumCounts,
        curves: &[SurvivalCurve<f64>],
        full_period: Option<&LogRankResult<f64>>,
        note: Option<String>,
        timeline: &[TimelinePoint<f64>],
    ) -> Result<StratumBlock> {
        let mut entries = Vec::with_capacity(timeline.len());
        for point in timeline {
            let p_value = round_sig(point.result.p_value);
            entries.push(TimelineEntry {
                horizon_days: point.horizon,
                chi_square: round_sig(point.result.chi_square),
                p_value,
                band: classify(p_value)?,
                degenerate: point.result.degenerate,
            });
        }
        let first_significant_horizon = entries
            .iter()
            .find(|e| e.band == SignificanceBand::Significant)
            .map(|e| e.horizon_days);
        Ok(StratumBlock {
            stratum: stratum.to_string(),
            counts,
            curves: curves.iter().map(ReportCurve::from_curve).collect(),
            full_period: full_period.map(TestSummary::from_result),
            note,
            timeline: entries,
            first_significant_horizon,
        })
    }
}

/// Complete audit output: metadata plus one block per stratum, ordered by
/// stratum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub metadata: ReportMetadata,
    pub summary: CohortSummary,
    pub strata: Vec<StratumBlock>,
}

impl AuditReport {
    pub fn stratum(&self, name: &str) -> Option<&StratumBlock> {
        self.strata.iter().find(|b| b.stratum == name)
    }
}

/// Per-stratum counts extracted from a cohort summary.
pub fn stratum_counts(
    summary: &CohortSummary,
    stratum: &Stratum,
    events: u64,
    censored: u64,
) -> StratumCounts {
    let per_group = summary
        .n_per_group_per_stratum
        .get(stratum)
        .copied()
        .unwrap_or(PerGroup {
            majority: 0,
            minority: 0,
        });
    StratumCounts {
        majority: per_group.majority,
        minority: per_group.minority,
        events,
        censored,
    }
}

/// Serialize the report as pretty-printed JSON with stable key order.
pub fn emit_json(report: &AuditReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

/// Parse a report back from its JSON form.
pub fn parse_json(text: &str) -> Result<AuditReport> {
    Ok(serde_json::from_str(text)?)
}

/// Long-format CSV files: one `curves_<stratum>.csv` per stratum plus a
/// single `pvalues.csv` with every stratum's horizon series. Returns
/// (file name, contents) pairs; all line endings are LF.
pub fn emit_curves_csv(report: &AuditReport) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for block in &report.strata {
        let mut out = String::from("group,time_days,survival,n_at_risk,n_events\n");
        for curve in &block.curves {
            for p in &curve.points {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    curve.group, p.time_days, p.survival, p.n_at_risk, p.n_events
                ));
            }
        }
        files.push((format!("curves_{}.csv", sanitize(&block.stratum)), out));
    }

    let mut out = String::from("stratum,horizon_days,chi_square,p_value,band\n");
    for block in &report.strata {
        for e in &block.timeline {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                block.stratum, e.horizon_days, e.chi_square, e.p_value, e.band
            ));
        }
    }
    files.push(("pvalues.csv".to_string(), out));
    files
}

/// File-name-safe form of a stratum label.
pub fn sanitize(stratum: &str) -> String {
    stratum
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Recompute each timeline band from the emitted p-value column; used by
/// the self-check tests and handy for consumers validating a report.
pub fn recompute_bands(report: &AuditReport) -> Result<BTreeMap<String, Vec<SignificanceBand>>> {
    let mut map = BTreeMap::new();
    for block in &report.strata {
        let bands: Result<Vec<_>> = block.timeline.iter().map(|e| classify(e.p_value)).collect();
        map.insert(block.stratum.clone(), bands?);
    }
    Ok(map)
}
