//! Domain types shared across the pipeline: groups, strata, follow-up
//! records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Binary group label the parity comparison is run over.
///
/// The ingestion layer maps the cohort file's own labels onto this pair;
/// everything downstream works with the closed two-label alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Majority,
    Minority,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::Majority, Group::Minority];

    pub fn other(self) -> Group {
        match self {
            Group::Majority => Group::Minority,
            Group::Minority => Group::Majority,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Majority => "majority",
            Group::Minority => "minority",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Group> {
        match s {
            "majority" => Ok(Group::Majority),
            "minority" => Ok(Group::Minority),
            other => Err(Error::InvalidMapping(format!(
                "group label must be `majority` or `minority`, got `{other}`"
            ))),
        }
    }
}

/// Pair of per-group values, one slot per [`Group`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerGroup<T> {
    pub majority: T,
    pub minority: T,
}

impl<T> PerGroup<T> {
    pub fn get(&self, group: Group) -> &T {
        match group {
            Group::Majority => &self.majority,
            Group::Minority => &self.minority,
        }
    }

    pub fn get_mut(&mut self, group: Group) -> &mut T {
        match group {
            Group::Majority => &mut self.majority,
            Group::Minority => &mut self.minority,
        }
    }
}

/// Decision-score stratum a subject was assigned to.
///
/// Banded quantization produces `Low`/`Medium`/`High`; raw-score mode keeps
/// each score as its own stratum; `Other` carries labels from normalized
/// cohort files written by other tools. The derived ordering (bands first,
/// then scores, then free-form labels) fixes the report block order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    Low,
    Medium,
    High,
    Score(i64),
    Other(String),
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stratum::Low => f.write_str("low"),
            Stratum::Medium => f.write_str("medium"),
            Stratum::High => f.write_str("high"),
            Stratum::Score(s) => write!(f, "{s}"),
            Stratum::Other(s) => f.write_str(s),
        }
    }
}

impl FromStr for Stratum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Stratum> {
        if s.is_empty() {
            return Err(Error::InvalidMapping("empty stratum label".to_string()));
        }
        Ok(match s {
            "low" => Stratum::Low,
            "medium" => Stratum::Medium,
            "high" => Stratum::High,
            other => match other.parse::<i64>() {
                Ok(score) => Stratum::Score(score),
                Err(_) => Stratum::Other(other.to_string()),
            },
        })
    }
}

impl Serialize for Stratum {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Stratum {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Stratum, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One subject's observed follow-up: group, stratum, observed time in whole
/// days since release, and whether the target event was seen (`true`) or the
/// observation was censored (`false`).
///
/// Time is integral by contract; sub-day inputs are rejected upstream rather
/// than rounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub group: Group,
    pub stratum: Stratum,
    pub time: u32,
    pub event: bool,
}

impl EventRecord {
    pub fn new(group: Group, stratum: Stratum, time: u32, event: bool) -> Self {
        EventRecord {
            group,
            stratum,
            time,
            event,
        }
    }
}

/// Split a cohort into per-stratum sub-cohorts, ordered by stratum.
pub fn partition_by_stratum(records: &[EventRecord]) -> BTreeMap<Stratum, Vec<EventRecord>> {
    let mut map: BTreeMap<Stratum, Vec<EventRecord>> = BTreeMap::new();
    for r in records {
        map.entry(r.stratum.clone()).or_default().push(r.clone());
    }
    map
}
