//! Risk-set bookkeeping: at-risk counts, observed events and expected
//! events per group at each event time of one stratum's cohort.

use crate::error::{Error, Result};
use crate::record::{EventRecord, PerGroup, Stratum};
use crate::scalar::Real;

/// One event time's risk-set quantities.
///
/// A subject is at risk at `time` when its observed time is `>= time`, so a
/// subject censored exactly at an event time still counts toward the risk
/// set there (events are processed before censorings at equal times).
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTableRow<S> {
    pub time: u32,
    pub n_at_risk: PerGroup<u64>,
    pub events: PerGroup<u64>,
    pub n_at_risk_total: u64,
    pub events_total: u64,
    /// Expected events per group under the equal-curves null:
    /// `E_d = O_total * N_d / N_total`.
    pub expected: PerGroup<S>,
}

/// Per-event-time table for one stratum, rows strictly increasing in time;
/// only times with at least one event appear.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable<S> {
    pub stratum: Stratum,
    pub rows: Vec<RiskTableRow<S>>,
    pub n_subjects: PerGroup<u64>,
    pub n_events: PerGroup<u64>,
}

impl<S> RiskTable<S> {
    pub fn n_subjects_total(&self) -> u64 {
        self.n_subjects.majority + self.n_subjects.minority
    }

    pub fn n_events_total(&self) -> u64 {
        self.n_events.majority + self.n_events.minority
    }
}

/// Build the risk table for one stratum's cohort.
///
/// Requires a non-empty cohort from a single stratum with both group labels
/// present; a group with zero events is fine.
pub fn build_risk_table<S: Real>(records: &[EventRecord]) -> Result<RiskTable<S>> {
    let first = records.first().ok_or(Error::EmptyCohort)?;
    let stratum = first.stratum.clone();
    if records.iter().any(|r| r.stratum != stratum) {
        return Err(Error::MixedStrata);
    }

    let mut n_subjects = PerGroup::<u64>::default();
    let mut n_events = PerGroup::<u64>::default();
    for r in records {
        *n_subjects.get_mut(r.group) += 1;
        if r.event {
            *n_events.get_mut(r.group) += 1;
        }
    }
    if n_subjects.majority == 0 || n_subjects.minority == 0 {
        return Err(Error::SingleGroup);
    }

    let mut order: Vec<&EventRecord> = records.iter().collect();
    order.sort_by_key(|r| r.time);

    let mut at_risk = n_subjects;
    let mut rows = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let t = order[i].time;
        let mut events = PerGroup::<u64>::default();
        let mut leaving = PerGroup::<u64>::default();
        while i < order.len() && order[i].time == t {
            let r = order[i];
            *leaving.get_mut(r.group) += 1;
            if r.event {
                *events.get_mut(r.group) += 1;
            }
            i += 1;
        }

        let events_total = events.majority + events.minority;
        if events_total >= 1 {
            let n_total = at_risk.majority + at_risk.minority;
            let o = S::from_count(events_total);
            let n = S::from_count(n_total);
            let expected = PerGroup {
                majority: o.clone() * S::from_count(at_risk.majority) / n.clone(),
                minority: o * S::from_count(at_risk.minority) / n,
            };
            rows.push(RiskTableRow {
                time: t,
                n_at_risk: at_risk,
                events,
                n_at_risk_total: n_total,
                events_total,
                expected,
            });
        }

        at_risk.majority -= leaving.majority;
        at_risk.minority -= leaving.minority;
    }

    Ok(RiskTable {
        stratum,
        rows,
        n_subjects,
        n_events,
    })
}
