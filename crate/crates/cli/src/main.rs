use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use survaudit_cli::{
    exit_code_for, run_audit, run_calibrate, run_curves, run_simulate, AuditOptions,
    CalibrateOptions, HorizonSpec, InputFormat, SimulateOptions,
};
use survaudit_core::error::{Error, Result};
use survaudit_core::ingest::{QuantizerMode, ScoreQuantizer};

/// Group-parity audit for right-censored time-to-event cohorts.
#[derive(Parser)]
#[command(name = "survaudit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: ingest, stratify, test per stratum and horizon, emit
    /// JSON/CSV/SVG artifacts
    Audit(AuditArgs),
    /// Draw a synthetic cohort from a structural-model config and export it
    /// in the normalized cohort format
    Simulate(SimulateArgs),
    /// Monte-Carlo calibration of the test: type-I error for an H0 config,
    /// power for an H1 config
    Calibrate(CalibrateArgs),
    /// Emit per-stratum survival-curve CSV files only
    Curves(CurvesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantizerChoice {
    Banded,
    Raw,
}

#[derive(Args)]
struct IngestArgs {
    /// Cohort file to read
    #[arg(long)]
    input: PathBuf,
    /// Built-in preset: `propublica`, or `normalized` for files already in
    /// the normalized cohort format
    #[arg(long, conflicts_with = "mapping")]
    preset: Option<String>,
    /// Column-mapping TOML file (keys: group_column, group_majority_value,
    /// group_minority_value, score_column, time_column, event_column)
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Field delimiter of the input file
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Score quantizer mode
    #[arg(long, value_enum, default_value_t = QuantizerChoice::Banded)]
    quantizer: QuantizerChoice,
    /// Highest score in the low band
    #[arg(long, default_value_t = 4)]
    low_max: i64,
    /// Highest score in the medium band
    #[arg(long, default_value_t = 7)]
    medium_max: i64,
    /// Smallest valid score (banded mode)
    #[arg(long, default_value_t = 1)]
    score_min: i64,
    /// Largest valid score (banded mode)
    #[arg(long, default_value_t = 10)]
    score_max: i64,
}

impl IngestArgs {
    fn format(&self) -> Result<InputFormat> {
        match (&self.preset, &self.mapping) {
            (Some(name), None) if name == "normalized" => Ok(InputFormat::Normalized),
            (Some(name), None) => Ok(InputFormat::Preset(name.clone())),
            (None, Some(path)) => Ok(InputFormat::MappingFile(path.clone())),
            (None, None) => Err(Error::InvalidMapping(
                "provide either --preset or --mapping".to_string(),
            )),
            (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
        }
    }

    fn quantizer(&self) -> ScoreQuantizer {
        match self.quantizer {
            QuantizerChoice::Raw => ScoreQuantizer::raw(),
            QuantizerChoice::Banded => ScoreQuantizer {
                mode: QuantizerMode::Banded,
                low_max: self.low_max,
                medium_max: self.medium_max,
                min_score: self.score_min,
                max_score: self.score_max,
            },
        }
    }

    fn delimiter_byte(&self) -> Result<u8> {
        u8::try_from(self.delimiter).map_err(|_| {
            Error::InvalidMapping("delimiter must be a single ASCII character".to_string())
        })
    }
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    /// Significance level for the summary verdicts
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// First horizon of the p-value sweep, in days
    #[arg(long, default_value_t = 28)]
    horizon_start: u32,
    /// Spacing between horizons, in days
    #[arg(long, default_value_t = 7)]
    horizon_step: u32,
    /// Last horizon; defaults to the maximum observed time
    #[arg(long)]
    horizon_end: Option<u32>,
    /// Directory artifacts are written under (overridden by
    /// SURVAUDIT_OUT_DIR)
    #[arg(long, default_value = "survaudit-out")]
    out_dir: PathBuf,
    /// Run directory name under the output directory; defaults to a UTC
    /// timestamp
    #[arg(long)]
    stamp: Option<String>,
    /// Seed the input cohort was generated with, recorded in the report
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset identifier recorded in the report; defaults to the input
    /// file name
    #[arg(long)]
    dataset_id: Option<String>,
}

impl AuditArgs {
    fn options(&self) -> Result<AuditOptions> {
        Ok(AuditOptions {
            input: self.ingest.input.clone(),
            format: self.ingest.format()?,
            delimiter: self.ingest.delimiter_byte()?,
            quantizer: self.ingest.quantizer(),
            alpha: self.alpha,
            horizon: HorizonSpec {
                start: self.horizon_start,
                step: self.horizon_step,
                end: self.horizon_end,
            },
            out_dir: self.out_dir.clone(),
            stamp: self.stamp.clone(),
            seed: self.seed,
            dataset_id: self.dataset_id.clone(),
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Structural-model config (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Number of subjects to draw
    #[arg(long)]
    n: u64,
    /// Generator seed
    #[arg(long)]
    seed: u64,
    /// Normalized cohort file to write
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Structural-model config (TOML); its hypothesis tag selects type-I
    /// error (H0) or power (H1)
    #[arg(long)]
    config: PathBuf,
    /// Number of Monte-Carlo replications
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    replications: u64,
    /// Subjects per group in each replication
    #[arg(long, default_value_t = 500)]
    n_per_group: u64,
    /// Rejection level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    ingest: IngestArgs,
    /// Directory artifacts are written under (overridden by
    /// SURVAUDIT_OUT_DIR)
    #[arg(long, default_value = "survaudit-out")]
    out_dir: PathBuf,
    /// Run directory name under the output directory
    #[arg(long)]
    stamp: Option<String>,
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Audit(args) => {
            let outcome = run_audit(&args.options()?)?;
            for line in &outcome.summary_lines {
                println!("{line}");
            }
            println!("artifacts in {}", outcome.run_dir.display());
            Ok(outcome.exit_code)
        }
        Command::Simulate(args) => {
            let outcome = run_simulate(&SimulateOptions {
                config_path: args.config,
                n: args.n,
                seed: args.seed,
                output: args.output,
            })?;
            for line in &outcome.summary_lines {
                println!("{line}");
            }
            Ok(0)
        }
        Command::Calibrate(args) => {
            let outcome = run_calibrate(&CalibrateOptions {
                config_path: args.config,
                replications: args.replications,
                n_per_group: args.n_per_group,
                alpha: args.alpha,
                seed: args.seed,
            })?;
            for line in &outcome.summary_lines {
                println!("{line}");
            }
            Ok(0)
        }
        Command::Curves(args) => {
            let outcome = run_curves(&AuditOptions {
                input: args.ingest.input.clone(),
                format: args.ingest.format()?,
                delimiter: args.ingest.delimiter_byte()?,
                quantizer: args.ingest.quantizer(),
                alpha: 0.05,
                horizon: HorizonSpec::default(),
                out_dir: args.out_dir.clone(),
                stamp: args.stamp.clone(),
                seed: None,
                dataset_id: None,
            })?;
            for line in &outcome.summary_lines {
                println!("{line}");
            }
            println!("artifacts in {}", outcome.run_dir.display());
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error) as u8)
        }
    }
}
