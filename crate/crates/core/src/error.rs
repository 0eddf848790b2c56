use std::path::PathBuf;

use crate::sim::Hypothesis;

/// Errors shared by all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cohort is empty")]
    EmptyCohort,

    #[error("only one group present; two-group comparison is undefined")]
    SingleGroup,

    #[error("no events in cohort")]
    NoEvents,

    #[error("records span multiple strata")]
    MixedStrata,

    #[error("records span multiple groups")]
    MixedGroups,

    #[error("chi-square statistic must be non-negative, got {0}")]
    NegativeStatistic(f64),

    #[error("probability outside [0, 1]: {0}")]
    OutOfRange(f64),

    #[error("horizon must be a positive number of days")]
    NonPositiveHorizon,

    #[error("horizons must be strictly increasing")]
    HorizonsNotIncreasing,

    #[error("score {value} outside declared range {min}..={max}")]
    ScoreOutOfRange { value: i64, min: i64, max: i64 },

    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("header is missing mapped column `{0}`")]
    HeaderMissingColumn(String),

    #[error("no rows survive parsing and filtering")]
    NoRowsSurvive,

    #[error("invalid column mapping: {0}")]
    InvalidMapping(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("operation requires a {expected} config, got {found}")]
    WrongHypothesis {
        expected: Hypothesis,
        found: Hypothesis,
    },

    #[error("normalized cohort file, line {line}: {reason}")]
    NormalizedFormat { line: usize, reason: String },

    #[error("unknown stratum `{0}` in report")]
    UnknownStratum(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse: {0}")]
    TomlParse(#[from] toml::de::Error),

    #[error("report parse: {0}")]
    JsonParse(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_config(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
