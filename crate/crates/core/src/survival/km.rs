//! Kaplan-Meier product-limit estimate of the no-event probability for one
//! group within one stratum.

use crate::error::{Error, Result};
use crate::record::{EventRecord, Group, Stratum};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveStep<S> {
    pub time: u32,
    pub survival: S,
    pub n_at_risk: u64,
    pub n_events: u64,
}

/// Identifies whose curve this is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveLabel {
    pub group: Group,
    pub stratum: Stratum,
}

/// Step-function estimate of S(t). The first step anchors the curve at
/// (time 0, survival 1); each further step records an event time. If events
/// occur at time 0 the anchor is followed by a second step at time 0
/// carrying the drop.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve<S> {
    pub label: CurveLabel,
    pub steps: Vec<CurveStep<S>>,
}

impl<S: Real> SurvivalCurve<S> {
    /// Survival estimate at follow-up day `t` (right-continuous step lookup).
    pub fn at(&self, t: u32) -> S {
        let mut value = S::one();
        for step in &self.steps {
            if step.time > t {
                break;
            }
            value = step.survival.clone();
        }
        value
    }
}

/// Product-limit estimator over one group's records within one stratum.
///
/// Censored subjects at an event time stay in the risk set for that time;
/// the curve drops only at times with at least one event.
pub fn kaplan_meier<S: Real>(records: &[EventRecord]) -> Result<SurvivalCurve<S>> {
    let first = records.first().ok_or(Error::EmptyCohort)?;
    let label = CurveLabel {
        group: first.group,
        stratum: first.stratum.clone(),
    };
    if records.iter().any(|r| r.stratum != label.stratum) {
        return Err(Error::MixedStrata);
    }
    if records.iter().any(|r| r.group != label.group) {
        return Err(Error::MixedGroups);
    }

    let mut order: Vec<&EventRecord> = records.iter().collect();
    order.sort_by_key(|r| r.time);

    let n_total = order.len() as u64;
    let mut steps = vec![CurveStep {
        time: 0,
        survival: S::one(),
        n_at_risk: n_total,
        n_events: 0,
    }];

    let mut at_risk = n_total;
    let mut survival = S::one();
    let mut i = 0;
    while i < order.len() {
        let t = order[i].time;
        let mut events = 0u64;
        let mut leaving = 0u64;
        while i < order.len() && order[i].time == t {
            leaving += 1;
            if order[i].event {
                events += 1;
            }
            i += 1;
        }
        if events >= 1 {
            survival = survival * S::from_count(at_risk - events) / S::from_count(at_risk);
            steps.push(CurveStep {
                time: t,
                survival: survival.clone(),
                n_at_risk: at_risk,
                n_events: events,
            });
        }
        at_risk -= leaving;
    }

    Ok(SurvivalCurve { label, steps })
}
