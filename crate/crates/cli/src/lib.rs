//! Pipeline orchestration behind the `survaudit` binary: ingest a cohort,
//! stratify it, run the per-stratum and per-horizon tests, and emit the
//! report artifacts; plus the simulate and calibrate entry points.

use std::fs;
use std::path::{Path, PathBuf};

use survaudit_core::error::{Error, Result};
use survaudit_core::ingest::{
    parse_cohort, read_normalized_path, to_event_records, write_normalized_path, CohortSummary,
    ColumnMapping, ScoreQuantizer,
};
use survaudit_core::record::{partition_by_stratum, EventRecord, Group, Stratum};
use survaudit_core::report::{
    emit_curves_csv, emit_json, render_svg, sanitize, stratum_counts, AuditReport, ReportMetadata,
    StratumBlock, SCHEMA_VERSION,
};
use survaudit_core::sim::{
    power_estimate, simulate, type1_rate, DagConfig, Hypothesis, RateEstimate, RNG_ALGORITHM,
};
use survaudit_core::survival::{kaplan_meier, logrank, pvalue_timeline, SurvivalCurve};

/// Exit-code contract: 0 success, 2 input/schema error, 3 statistical
/// degeneracy in every stratum, 4 internal invariant violation.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Map an error escaping the pipeline to the exit-code contract.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::FileNotFound(_)
        | Error::HeaderMissingColumn(_)
        | Error::NoRowsSurvive
        | Error::InvalidMapping(_)
        | Error::UnknownPreset(_)
        | Error::InvalidConfig { .. }
        | Error::WrongHypothesis { .. }
        | Error::NormalizedFormat { .. }
        | Error::ScoreOutOfRange { .. }
        | Error::EmptyCohort
        | Error::NonPositiveHorizon
        | Error::HorizonsNotIncreasing
        | Error::Io(_)
        | Error::Csv(_)
        | Error::TomlParse(_) => EXIT_INPUT,
        Error::SingleGroup | Error::NoEvents => EXIT_DEGENERATE,
        _ => EXIT_INTERNAL,
    }
}

/// Environment variable that overrides the output directory when set.
pub const OUT_DIR_ENV: &str = "SURVAUDIT_OUT_DIR";

/// Horizon grid request: explicit end, or automatic (maximum observed
/// time).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonSpec {
    pub start: u32,
    pub step: u32,
    pub end: Option<u32>,
}

impl Default for HorizonSpec {
    fn default() -> Self {
        HorizonSpec {
            start: 28,
            step: 7,
            end: None,
        }
    }
}

impl HorizonSpec {
    fn grid(&self, max_observed: u32) -> Result<Vec<u32>> {
        if self.start == 0 {
            return Err(Error::invalid_config("horizon_start", "must be positive"));
        }
        if self.step == 0 {
            return Err(Error::invalid_config("horizon_step", "must be positive"));
        }
        let end = self.end.unwrap_or(max_observed);
        if end == 0 {
            return Ok(Vec::new());
        }
        if end < self.start {
            return Ok(vec![end]);
        }
        Ok((self.start..=end).step_by(self.step as usize).collect())
    }
}

/// How the cohort file is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputFormat {
    /// Normalized four-column cohort file; strata are already assigned.
    Normalized,
    /// Delimiter-separated file read through a built-in preset mapping.
    Preset(String),
    /// Delimiter-separated file read through a mapping TOML file.
    MappingFile(PathBuf),
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub input: PathBuf,
    pub format: InputFormat,
    pub delimiter: u8,
    pub quantizer: ScoreQuantizer,
    pub alpha: f64,
    pub horizon: HorizonSpec,
    pub out_dir: PathBuf,
    /// Name of the run directory under `out_dir`; defaults to a UTC
    /// timestamp.
    pub stamp: Option<String>,
    /// Generator seed of a synthetic input, recorded in the metadata.
    pub seed: Option<u64>,
    pub dataset_id: Option<String>,
}

#[derive(Debug)]
pub struct AuditOutcome {
    pub report: AuditReport,
    pub run_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary_lines: Vec<String>,
    pub exit_code: i32,
}

fn default_stamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%SZ").to_string()
}

fn resolve_out_dir(requested: &Path) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| requested.to_path_buf())
}

fn load_cohort(opts: &AuditOptions) -> Result<(Vec<EventRecord>, CohortSummary, Option<String>)> {
    match &opts.format {
        InputFormat::Normalized => {
            let records = read_normalized_path(&opts.input)?;
            if records.is_empty() {
                return Err(Error::NoRowsSurvive);
            }
            let summary = CohortSummary::from_records(&records);
            Ok((records, summary, Some("normalized".to_string())))
        }
        InputFormat::Preset(name) => {
            let mapping = ColumnMapping::preset(name)?;
            let (records, summary) = map_rows(opts, &mapping)?;
            Ok((records, summary, Some(name.clone())))
        }
        InputFormat::MappingFile(path) => {
            let mapping = ColumnMapping::from_toml_path(path)?;
            let label = format!("mapping:{}", path.display());
            let (records, summary) = map_rows(opts, &mapping)?;
            Ok((records, summary, Some(label)))
        }
    }
}

fn map_rows(
    opts: &AuditOptions,
    mapping: &ColumnMapping,
) -> Result<(Vec<EventRecord>, CohortSummary)> {
    let (rows, diagnostics) = parse_cohort(&opts.input, mapping, opts.delimiter)?;
    let (records, summary) = to_event_records(&rows, mapping, &opts.quantizer, &diagnostics)?;
    if records.is_empty() {
        return Err(Error::NoRowsSurvive);
    }
    Ok((records, summary))
}

struct StratumAnalysis {
    block: StratumBlock,
    degenerate: bool,
    final_line: String,
}

fn analyze_stratum(
    stratum: &Stratum,
    records: &[EventRecord],
    summary: &CohortSummary,
    grid: &[u32],
) -> Result<StratumAnalysis> {
    let mut curves: Vec<SurvivalCurve<f64>> = Vec::new();
    for group in Group::BOTH {
        let group_records: Vec<EventRecord> = records
            .iter()
            .filter(|r| r.group == group)
            .cloned()
            .collect();
        if !group_records.is_empty() {
            curves.push(kaplan_meier::<f64>(&group_records)?);
        }
    }

    let (full_period, note) = match logrank::<f64>(records) {
        Ok(result) => (Some(result), None),
        Err(Error::SingleGroup) => (
            None,
            Some("single group present; comparison undefined".to_string()),
        ),
        Err(Error::NoEvents) => (None, Some("no events observed".to_string())),
        Err(e) => return Err(e),
    };

    let single_group = matches!(
        note.as_deref(),
        Some("single group present; comparison undefined")
    );
    let timeline = if single_group || grid.is_empty() {
        Vec::new()
    } else {
        pvalue_timeline::<f64>(records, grid)?
    };

    let events = records.iter().filter(|r| r.event).count() as u64;
    let censored = records.len() as u64 - events;
    let counts = stratum_counts(summary, stratum, events, censored);
    let block = StratumBlock::new(
        stratum,
        counts,
        &curves,
        full_period.as_ref(),
        note.clone(),
        &timeline,
    )?;

    let degenerate = match &block.full_period {
        None => true,
        Some(test) => test.degenerate,
    };

    let final_line = match (&block.full_period, &note) {
        (None, Some(reason)) => format!("stratum {stratum}: not testable ({reason})"),
        (Some(_), _) => {
            let final_entry = block.timeline.last();
            match final_entry {
                Some(entry) => {
                    let first = block
                        .first_significant_horizon
                        .map(|d| format!("; first significant at day {d}"))
                        .unwrap_or_default();
                    format!(
                        "stratum {stratum}: {} at final horizon {} (p = {}){first}",
                        entry.band, entry.horizon_days, entry.p_value
                    )
                }
                None => {
                    let test = block.full_period.as_ref().unwrap();
                    format!(
                        "stratum {stratum}: no horizons; full-period p = {}",
                        test.p_value
                    )
                }
            }
        }
        (None, None) => unreachable!("missing test always carries a note"),
    };

    Ok(StratumAnalysis {
        block,
        degenerate,
        final_line,
    })
}

/// Run the full audit pipeline and write every artifact under a
/// run-stamped directory. Returns the report plus the exit code mandated
/// by the degeneracy contract.
pub fn run_audit(opts: &AuditOptions) -> Result<AuditOutcome> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::invalid_config(
            "alpha",
            "must lie strictly between 0 and 1",
        ));
    }

    let (records, summary, preset_label) = load_cohort(opts)?;
    let max_observed = records.iter().map(|r| r.time).max().unwrap_or(0);
    let grid = opts.horizon.grid(max_observed)?;

    let mut strata_blocks = Vec::new();
    let mut summary_lines = Vec::new();
    let mut all_degenerate = true;
    for (stratum, stratum_records) in partition_by_stratum(&records) {
        let analysis = analyze_stratum(&stratum, &stratum_records, &summary, &grid)?;
        all_degenerate &= analysis.degenerate;
        summary_lines.push(analysis.final_line);
        strata_blocks.push(analysis.block);
    }

    let quantizer_label = match opts.format {
        InputFormat::Normalized => "none (input pre-stratified)".to_string(),
        _ => opts.quantizer.describe(),
    };
    let dataset_id = opts.dataset_id.clone().unwrap_or_else(|| {
        opts.input
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| opts.input.display().to_string())
    });

    let report = AuditReport {
        metadata: ReportMetadata {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_id,
            preset: preset_label,
            quantizer: quantizer_label,
            alpha: opts.alpha,
            horizon_grid: grid,
            seed: opts.seed,
            rng_algorithm: opts.seed.map(|_| RNG_ALGORITHM.to_string()),
        },
        summary,
        strata: strata_blocks,
    };

    let run_dir =
        resolve_out_dir(&opts.out_dir).join(opts.stamp.clone().unwrap_or_else(default_stamp));
    fs::create_dir_all(&run_dir)?;

    let mut files = Vec::new();
    let json_path = run_dir.join("report.json");
    fs::write(&json_path, emit_json(&report))?;
    files.push(json_path);

    for (name, contents) in emit_curves_csv(&report) {
        let path = run_dir.join(name);
        fs::write(&path, contents)?;
        files.push(path);
    }

    for block in &report.strata {
        let path = run_dir.join(format!("{}.svg", sanitize(&block.stratum)));
        fs::write(&path, render_svg(&report, &block.stratum)?)?;
        files.push(path);
    }

    let exit_code = if all_degenerate {
        EXIT_DEGENERATE
    } else {
        EXIT_OK
    };
    Ok(AuditOutcome {
        report,
        run_dir,
        files,
        summary_lines,
        exit_code,
    })
}

/// Emit only the per-stratum survival-curve CSV files for a cohort.
pub fn run_curves(opts: &AuditOptions) -> Result<AuditOutcome> {
    let (records, summary, preset_label) = load_cohort(opts)?;

    let mut strata_blocks = Vec::new();
    let mut summary_lines = Vec::new();
    for (stratum, stratum_records) in partition_by_stratum(&records) {
        let mut curves: Vec<SurvivalCurve<f64>> = Vec::new();
        for group in Group::BOTH {
            let group_records: Vec<EventRecord> = stratum_records
                .iter()
                .filter(|r| r.group == group)
                .cloned()
                .collect();
            if !group_records.is_empty() {
                curves.push(kaplan_meier::<f64>(&group_records)?);
            }
        }
        let events = stratum_records.iter().filter(|r| r.event).count() as u64;
        let censored = stratum_records.len() as u64 - events;
        let counts = stratum_counts(&summary, &stratum, events, censored);
        summary_lines.push(format!(
            "stratum {stratum}: {} curve(s), {} subjects, {} events",
            curves.len(),
            stratum_records.len(),
            events
        ));
        strata_blocks.push(StratumBlock::new(
            &stratum,
            counts,
            &curves,
            None,
            None,
            &[],
        )?);
    }

    let report = AuditReport {
        metadata: ReportMetadata {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_id: opts
                .dataset_id
                .clone()
                .unwrap_or_else(|| opts.input.display().to_string()),
            preset: preset_label,
            quantizer: opts.quantizer.describe(),
            alpha: opts.alpha,
            horizon_grid: Vec::new(),
            seed: opts.seed,
            rng_algorithm: None,
        },
        summary,
        strata: strata_blocks,
    };

    let run_dir =
        resolve_out_dir(&opts.out_dir).join(opts.stamp.clone().unwrap_or_else(default_stamp));
    fs::create_dir_all(&run_dir)?;
    let mut files = Vec::new();
    for (name, contents) in emit_curves_csv(&report) {
        if !name.starts_with("curves_") {
            continue;
        }
        let path = run_dir.join(name);
        fs::write(&path, contents)?;
        files.push(path);
    }

    Ok(AuditOutcome {
        report,
        run_dir,
        files,
        summary_lines,
        exit_code: EXIT_OK,
    })
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub config_path: PathBuf,
    pub n: u64,
    pub seed: u64,
    pub output: PathBuf,
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub n_subjects: u64,
    pub n_events: u64,
    pub output: PathBuf,
    pub summary_lines: Vec<String>,
}

/// Draw a synthetic cohort and export it in the normalized cohort format,
/// ready for `audit --preset normalized`.
pub fn run_simulate(opts: &SimulateOptions) -> Result<SimulateOutcome> {
    let config = DagConfig::from_toml_path(&opts.config_path)?;
    let subjects = simulate(&config, opts.n, opts.seed)?;
    let records: Vec<EventRecord> = subjects.iter().map(|s| s.observed.clone()).collect();
    write_normalized_path(&records, &opts.output)?;
    let n_events = records.iter().filter(|r| r.event).count() as u64;
    let summary_lines = vec![format!(
        "simulated {} subjects ({} events, {} censored) under {} with seed {} ({}), wrote {}",
        records.len(),
        n_events,
        records.len() as u64 - n_events,
        config.hypothesis,
        opts.seed,
        RNG_ALGORITHM,
        opts.output.display()
    )];
    Ok(SimulateOutcome {
        n_subjects: records.len() as u64,
        n_events,
        output: opts.output.clone(),
        summary_lines,
    })
}

#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub config_path: PathBuf,
    pub replications: u64,
    pub n_per_group: u64,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Debug)]
pub struct CalibrateOutcome {
    pub hypothesis: Hypothesis,
    pub estimate: RateEstimate,
    pub summary_lines: Vec<String>,
}

/// Monte-Carlo error-rate calibration: type-I error for an `H0` config,
/// power for an `H1` config.
pub fn run_calibrate(opts: &CalibrateOptions) -> Result<CalibrateOutcome> {
    let config = DagConfig::from_toml_path(&opts.config_path)?;
    let estimate = match config.hypothesis {
        Hypothesis::H0 => type1_rate(
            &config,
            opts.n_per_group,
            opts.replications,
            opts.alpha,
            opts.seed,
        )?,
        Hypothesis::H1 => power_estimate(
            &config,
            opts.n_per_group,
            opts.replications,
            opts.alpha,
            opts.seed,
        )?,
    };
    let measure = match config.hypothesis {
        Hypothesis::H0 => "type-I error",
        Hypothesis::H1 => "power",
    };
    let summary_lines = vec![
        format!(
            "calibration: {measure} under {} | replications {} | n/group {} | alpha {} | seed {} ({})",
            config.hypothesis, opts.replications, opts.n_per_group, opts.alpha, opts.seed,
            RNG_ALGORITHM
        ),
        format!(
            "tests {} | rejections {} | rate {:.6} | 95% CI [{:.6}, {:.6}]",
            estimate.n_tests, estimate.n_rejections, estimate.rate, estimate.ci_low,
            estimate.ci_high
        ),
    ];
    Ok(CalibrateOutcome {
        hypothesis: config.hypothesis,
        estimate,
        summary_lines,
    })
}
