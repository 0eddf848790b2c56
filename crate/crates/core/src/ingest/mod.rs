//! Cohort file ingestion: column mapping, type checking, score
//! quantization, inclusion filtering, and the normalized cohort format that
//! decouples the estimators from source schemas.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{EventRecord, Group, PerGroup, Stratum};

/// Built-in mapping for the widely used public pretrial-assessment extract
/// (`compas-scores-two-years.csv`). The `end`/`event` columns are the
/// follow-up duration in days and the re-arrest indicator from the
/// event-history portion of that extract; treating `end` as the observed
/// time is this preset's documented assumption.
const PROPUBLICA_PRESET: &str = include_str!("../../presets/propublica.toml");

/// Names the cohort file columns and the two group labels of interest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnMapping {
    pub group_column: String,
    pub group_majority_value: String,
    pub group_minority_value: String,
    pub score_column: String,
    pub time_column: String,
    pub event_column: String,
    #[serde(default)]
    pub preset: Option<String>,
}

impl ColumnMapping {
    /// Look up a built-in preset by name.
    pub fn preset(name: &str) -> Result<ColumnMapping> {
        match name {
            "propublica" => {
                let mut m: ColumnMapping = toml::from_str(PROPUBLICA_PRESET)?;
                m.preset = Some("propublica".to_string());
                m.validate()?;
                Ok(m)
            }
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Parse a mapping from a TOML file with keys named exactly like the
    /// struct fields.
    pub fn from_toml_path(path: &Path) -> Result<ColumnMapping> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path)?;
        let mapping: ColumnMapping = toml::from_str(&text)?;
        mapping.validate()?;
        Ok(mapping)
    }

    pub fn validate(&self) -> Result<()> {
        let columns = [
            &self.group_column,
            &self.score_column,
            &self.time_column,
            &self.event_column,
        ];
        for (i, a) in columns.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::InvalidMapping("empty column name".to_string()));
            }
            for b in columns.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::InvalidMapping(format!(
                        "column `{a}` mapped more than once"
                    )));
                }
            }
        }
        if self.group_majority_value.is_empty() || self.group_minority_value.is_empty() {
            return Err(Error::InvalidMapping("empty group value".to_string()));
        }
        if self.group_majority_value == self.group_minority_value {
            return Err(Error::InvalidMapping(
                "majority and minority group values must differ".to_string(),
            ));
        }
        Ok(())
    }
}

/// How decision scores become strata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantizerMode {
    /// Scores fold into low/medium/high bands at the configured cut points.
    Banded,
    /// Every score is its own stratum.
    Raw,
}

/// Score-to-stratum quantizer.
///
/// Banded mode validates scores against the declared range and cuts it into
/// low/medium/high at `low_max` and `medium_max` (defaults 1-4 / 5-7 /
/// 8-10). Raw mode passes any score through as its own stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreQuantizer {
    pub mode: QuantizerMode,
    pub low_max: i64,
    pub medium_max: i64,
    pub min_score: i64,
    pub max_score: i64,
}

impl ScoreQuantizer {
    pub fn banded() -> ScoreQuantizer {
        ScoreQuantizer {
            mode: QuantizerMode::Banded,
            low_max: 4,
            medium_max: 7,
            min_score: 1,
            max_score: 10,
        }
    }

    pub fn raw() -> ScoreQuantizer {
        ScoreQuantizer {
            mode: QuantizerMode::Raw,
            low_max: 0,
            medium_max: 0,
            min_score: i64::MIN,
            max_score: i64::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == QuantizerMode::Banded {
            let ok = self.min_score <= self.low_max
                && self.low_max < self.medium_max
                && self.medium_max < self.max_score;
            if !ok {
                return Err(Error::InvalidMapping(format!(
                    "band edges must satisfy min <= low_max < medium_max < max \
                     (got {} <= {} < {} < {})",
                    self.min_score, self.low_max, self.medium_max, self.max_score
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self.mode {
            QuantizerMode::Banded => format!(
                "banded({}-{}/{}-{}/{}-{})",
                self.min_score,
                self.low_max,
                self.low_max + 1,
                self.medium_max,
                self.medium_max + 1,
                self.max_score
            ),
            QuantizerMode::Raw => "raw".to_string(),
        }
    }
}

/// Map one score to its stratum. Banded mode reports `ScoreOutOfRange` for
/// scores outside the declared range; raw mode accepts whatever the file
/// holds.
pub fn quantize(score: i64, q: &ScoreQuantizer) -> Result<Stratum> {
    match q.mode {
        QuantizerMode::Raw => Ok(Stratum::Score(score)),
        QuantizerMode::Banded => {
            if score < q.min_score || score > q.max_score {
                return Err(Error::ScoreOutOfRange {
                    value: score,
                    min: q.min_score,
                    max: q.max_score,
                });
            }
            Ok(if score <= q.low_max {
                Stratum::Low
            } else if score <= q.medium_max {
                Stratum::Medium
            } else {
                Stratum::High
            })
        }
    }
}

/// One type-checked input row, prior to group mapping and quantization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub group_value: String,
    pub score: i64,
    pub time_days: u32,
    pub event: bool,
}

/// Counters and notes from the parse pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseDiagnostics {
    pub n_input_rows: u64,
    /// Rows dropped because a mapped field was missing or failed its type
    /// check (time must be a whole non-negative day count, score an
    /// integer, event one of 0/1/true/false).
    pub n_dropped_missing: u64,
    pub notes: Vec<String>,
}

fn parse_event_flag(s: &str) -> Option<bool> {
    match s {
        "1" => Some(true),
        "0" => Some(false),
        _ => match s.to_ascii_lowercase().as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        },
    }
}

/// Parse a delimiter-separated cohort file against a column mapping.
///
/// Rows with a missing or malformed mapped field are dropped and counted;
/// sub-day times are rejected, not rounded. Fails with
/// `HeaderMissingColumn` naming the first absent column and with
/// `NoRowsSurvive` when nothing parses.
pub fn parse_cohort(
    path: &Path,
    mapping: &ColumnMapping,
    delimiter: u8,
) -> Result<(Vec<RawRow>, ParseDiagnostics)> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    mapping.validate()?;

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::HeaderMissingColumn(name.to_string()))
    };
    let group_idx = index_of(&mapping.group_column)?;
    let score_idx = index_of(&mapping.score_column)?;
    let time_idx = index_of(&mapping.time_column)?;
    let event_idx = index_of(&mapping.event_column)?;

    let mut rows = Vec::new();
    let mut diag = ParseDiagnostics::default();
    for record in reader.records() {
        let record = record?;
        diag.n_input_rows += 1;

        let field = |idx: usize| record.get(idx).map(str::trim).filter(|s| !s.is_empty());
        let parsed = (|| {
            let group_value = field(group_idx)?.to_string();
            let score = field(score_idx)?.parse::<i64>().ok()?;
            let time_days = field(time_idx)?.parse::<u32>().ok()?;
            let event = parse_event_flag(field(event_idx)?)?;
            Some(RawRow {
                group_value,
                score,
                time_days,
                event,
            })
        })();

        match parsed {
            Some(row) => rows.push(row),
            None => diag.n_dropped_missing += 1,
        }
    }

    if rows.is_empty() {
        return Err(Error::NoRowsSurvive);
    }

    if let Some(preset) = &mapping.preset {
        diag.notes.push(format!(
            "preset `{preset}`: parsed {} rows ({} dropped)",
            rows.len(),
            diag.n_dropped_missing
        ));
        if preset == "propublica" && !(1_000..=100_000).contains(&rows.len()) {
            diag.notes.push(format!(
                "row count {} is far from the preset's expected magnitude (~10,000)",
                rows.len()
            ));
        }
    }

    Ok((rows, diag))
}

/// Cohort composition after filtering. Every input row lands in exactly one
/// of emitted / dropped-missing / dropped-group / dropped-range.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub n_total: u64,
    pub n_events: u64,
    pub n_censored: u64,
    pub n_dropped_missing: u64,
    pub n_dropped_group: u64,
    pub n_dropped_range: u64,
    pub n_per_group_per_stratum: BTreeMap<Stratum, PerGroup<u64>>,
}

impl CohortSummary {
    /// Tally `records` that already passed filtering; drop counters stay 0.
    pub fn from_records(records: &[EventRecord]) -> CohortSummary {
        let mut summary = CohortSummary::default();
        for r in records {
            summary.count(r);
        }
        summary
    }

    fn count(&mut self, r: &EventRecord) {
        self.n_total += 1;
        if r.event {
            self.n_events += 1;
        } else {
            self.n_censored += 1;
        }
        *self
            .n_per_group_per_stratum
            .entry(r.stratum.clone())
            .or_default()
            .get_mut(r.group) += 1;
    }
}

/// Map parsed rows to follow-up records: assign the binary group label,
/// quantize the score into a stratum, and drop rows whose group value
/// matches neither declared label or whose score is out of range.
pub fn to_event_records(
    rows: &[RawRow],
    mapping: &ColumnMapping,
    quantizer: &ScoreQuantizer,
    parse_diag: &ParseDiagnostics,
) -> Result<(Vec<EventRecord>, CohortSummary)> {
    quantizer.validate()?;

    let mut records = Vec::with_capacity(rows.len());
    let mut summary = CohortSummary {
        n_dropped_missing: parse_diag.n_dropped_missing,
        ..CohortSummary::default()
    };

    for row in rows {
        let group = if row.group_value == mapping.group_majority_value {
            Group::Majority
        } else if row.group_value == mapping.group_minority_value {
            Group::Minority
        } else {
            summary.n_dropped_group += 1;
            continue;
        };
        let stratum = match quantize(row.score, quantizer) {
            Ok(s) => s,
            Err(Error::ScoreOutOfRange { .. }) => {
                summary.n_dropped_range += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let record = EventRecord::new(group, stratum, row.time_days, row.event);
        summary.count(&record);
        records.push(record);
    }

    Ok((records, summary))
}

pub const NORMALIZED_HEADER: &str = "group,stratum,time_days,event";

/// Write records in the normalized cohort format: a four-column
/// comma-separated file with LF line endings and no quoting. Stratum labels
/// containing the delimiter or a line break cannot be encoded and are
/// rejected.
pub fn write_normalized<W: Write>(records: &[EventRecord], mut out: W) -> Result<()> {
    writeln!(out, "{NORMALIZED_HEADER}")?;
    for r in records {
        let stratum = r.stratum.to_string();
        if stratum.contains(',') || stratum.contains('\n') || stratum.contains('\r') {
            return Err(Error::InvalidMapping(format!(
                "stratum label `{stratum}` cannot be written unquoted"
            )));
        }
        writeln!(
            out,
            "{},{},{},{}",
            r.group,
            stratum,
            r.time,
            if r.event { 1 } else { 0 }
        )?;
    }
    Ok(())
}

/// Write the normalized cohort format to a file path.
pub fn write_normalized_path(records: &[EventRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_normalized(records, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Read the normalized cohort format. Malformed lines are hard errors — the
/// format is produced by this tool, so damage means the file is not what it
/// claims to be.
pub fn read_normalized<R: BufRead>(reader: R) -> Result<Vec<EventRecord>> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::NormalizedFormat {
            line: 1,
            reason: "empty file".to_string(),
        })?;
    if header.trim_end() != NORMALIZED_HEADER {
        return Err(Error::NormalizedFormat {
            line: 1,
            reason: format!("expected header `{NORMALIZED_HEADER}`"),
        });
    }

    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::NormalizedFormat {
            line: line_no,
            reason: reason.to_string(),
        };
        let mut fields = line.split(',');
        let group = fields
            .next()
            .ok_or_else(|| bad("missing group"))?
            .parse::<Group>()
            .map_err(|_| bad("group must be `majority` or `minority`"))?;
        let stratum = Stratum::from_str(fields.next().ok_or_else(|| bad("missing stratum"))?)
            .map_err(|_| bad("bad stratum label"))?;
        let time = fields
            .next()
            .ok_or_else(|| bad("missing time_days"))?
            .parse::<u32>()
            .map_err(|_| bad("time_days must be a whole non-negative day count"))?;
        let event = match fields.next().ok_or_else(|| bad("missing event"))? {
            "1" => true,
            "0" => false,
            _ => return Err(bad("event must be 0 or 1")),
        };
        if fields.next().is_some() {
            return Err(bad("too many fields"));
        }
        records.push(EventRecord::new(group, stratum, time, event));
    }
    Ok(records)
}

/// Read the normalized cohort format from a file path.
pub fn read_normalized_path(path: &Path) -> Result<Vec<EventRecord>> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = fs::File::open(path)?;
    read_normalized(std::io::BufReader::new(file))
}
