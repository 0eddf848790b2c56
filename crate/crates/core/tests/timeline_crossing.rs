//! Regression test for the horizon sweep on a cohort whose group gap opens
//! late: the minority hazard doubles after day 200, so the evidence band
//! must move from insufficient to significant at some horizon past the
//! break point. The crossing horizon is pinned from a fixed-seed run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use survaudit_core::record::{EventRecord, Group, Stratum};
use survaudit_core::survival::{pvalue_timeline, SignificanceBand};

const KNOT: f64 = 200.0;
const BASE_RATE: f64 = 0.002;
const CENSOR_RATE: f64 = 0.0005;
const FOLLOWUP: u32 = 730;
const N_PER_GROUP: usize = 2_000;

// inverse CDF of a two-piece exponential: hazard `rate1` before `knot`,
// `rate2` after
fn piecewise_exp(u: f64, rate1: f64, rate2: f64, knot: f64) -> f64 {
    let cumulative = -(1.0 - u).ln();
    if cumulative <= rate1 * knot {
        cumulative / rate1
    } else {
        knot + (cumulative - rate1 * knot) / rate2
    }
}

fn observe(group: Group, tau: f64, tau_censor: f64) -> EventRecord {
    let cutoff = f64::from(FOLLOWUP);
    let first = tau.min(tau_censor);
    let event = tau <= tau_censor && tau <= cutoff;
    let time = if first > cutoff {
        FOLLOWUP
    } else {
        first.ceil() as u32
    };
    EventRecord::new(group, Stratum::Low, time, event)
}

fn late_divergence_cohort(seed: u64) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * N_PER_GROUP);
    for group in [Group::Majority, Group::Minority] {
        let late_rate = match group {
            Group::Majority => BASE_RATE,
            Group::Minority => 2.0 * BASE_RATE,
        };
        for _ in 0..N_PER_GROUP {
            let u_event: f64 = rng.random();
            let u_censor: f64 = rng.random();
            let tau = piecewise_exp(u_event, BASE_RATE, late_rate, KNOT);
            let tau_censor = -(1.0 - u_censor).ln() / CENSOR_RATE;
            records.push(observe(group, tau, tau_censor));
        }
    }
    records
}

#[test]
fn band_crosses_to_significant_only_after_the_hazard_break() {
    let records = late_divergence_cohort(20_240_417);
    let grid: Vec<u32> = (28..=FOLLOWUP).step_by(7).collect();
    let points = pvalue_timeline::<f64>(&records, &grid).unwrap();

    assert_eq!(points[0].band, SignificanceBand::Insufficient);
    assert_eq!(
        points.last().unwrap().band,
        SignificanceBand::Significant,
        "final horizon p = {}",
        points.last().unwrap().result.p_value
    );

    let crossing = points
        .iter()
        .find(|p| p.band == SignificanceBand::Significant)
        .map(|p| p.horizon)
        .expect("a significant horizon exists");
    assert!(
        crossing > KNOT as u32,
        "evidence appeared at day {crossing}, before the hazards diverge"
    );

    // fixed-seed regression value
    assert_eq!(crossing, 245);

    // while the hazards agree the curves carry no evidence
    for point in points.iter().take_while(|p| p.horizon <= KNOT as u32) {
        assert_ne!(
            point.band,
            SignificanceBand::Significant,
            "horizon {} significant with identical hazards",
            point.horizon
        );
    }
}
