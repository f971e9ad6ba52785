// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end behind the `cpd` binary.
//!
//! Exit codes: 0 on success, 1 when a component fails, 2 on usage errors.
//! Data goes to files or stdout; diagnostics go to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::datagen::generate;
use crate::detector::{detect_series_with, Algorithm, DetectorConfig};
use crate::error::{CpdError, Result};
use crate::ingest::{extract_wide_row, parse_timestamp, read_series_csv, resample_every_k, Column, TimeSeriesFrame};
use crate::metrics::{evaluate, MetricsReport, DEFAULT_LAMBDA_GRID, SWEEP_LAMBDA_GRID};
use crate::nig::init_nig;
use crate::output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cpd", version, about = "Bayesian online change point detection (BOCPD / BOCPD-BLS)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one detector over a file or a synthetic series.
    Detect(DetectArgs),
    /// Write a synthetic benchmark series and its truth sidecar.
    Synth(SynthArgs),
    /// Score both detectors on the synthetic benchmarks.
    Validate(ValidateArgs),
    /// Change point locations for every lambda in a grid.
    Sweep(SweepArgs),
    /// Normalize a raw CSV into `timestamp,value`.
    Ingest(IngestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Bocpd,
    BocpdBls,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Bocpd => Algorithm::Bocpd,
            AlgorithmArg::BocpdBls => Algorithm::BocpdBls,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// One timestamp column and one value column.
    #[default]
    Series,
    /// JHU wide table (one row per region, one column per date).
    Jhu,
}

fn parse_lambda(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 1.0 {
        Ok(v)
    } else {
        Err(format!("lambda must be > 1; got {s}"))
    }
}

fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_lambda).collect()
}

fn parse_prune(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("prune threshold must be in (0, 1); got {s}"))
    }
}

fn parse_datasets(s: &str) -> std::result::Result<Vec<u32>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok((1..=6).collect());
    }
    s.split(',')
        .map(|p| match p.trim().parse::<u32>() {
            Ok(id @ 1..=6) => Ok(id),
            _ => Err(format!("dataset must be 1..6 or 'all'; got {p:?}")),
        })
        .collect()
}

fn parse_algorithms(s: &str) -> std::result::Result<Vec<Algorithm>, String> {
    s.split(',').map(|p| p.parse::<Algorithm>().map_err(|e| e.to_string())).collect()
}

fn parse_time(s: &str) -> std::result::Result<i64, String> {
    parse_timestamp(s).ok_or_else(|| format!("unrecognized timestamp {s:?}"))
}

/// Where the series comes from: a file, or a seeded synthetic draw.
#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "synth_dataset"])))]
pub struct SourceArgs {
    /// Input CSV file.
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    /// Synthetic dataset id instead of a file.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6), conflicts_with = "input")]
    pub synth_dataset: Option<u32>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[command(flatten)]
    pub read: ReadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReadArgs {
    #[arg(long, value_enum, default_value_t = InputFormat::Series)]
    pub format: InputFormat,

    /// Time column: header name or zero-based index.
    #[arg(long, default_value = "0")]
    pub time_column: String,

    /// Value column: header name or zero-based index (e.g. `Close`).
    #[arg(long, default_value = "1")]
    pub value_column: String,

    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,

    /// Keep every k-th row of the window.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub every: u64,

    /// Window start (epoch seconds or date).
    #[arg(long, value_parser = parse_time)]
    pub start: Option<i64>,

    /// Window end, inclusive.
    #[arg(long, value_parser = parse_time)]
    pub end: Option<i64>,

    /// Country/Region to sum for `--format jhu`.
    #[arg(long)]
    pub country: Option<String>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long, value_enum, default_value_t = AlgorithmArg::BocpdBls)]
    pub algorithm: AlgorithmArg,

    #[arg(long, default_value_t = 30.0, value_parser = parse_lambda)]
    pub lambda: f64,

    /// Prior mean for a fresh run (relative to the baseline for bocpd-bls).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub prior_loc: f64,

    #[command(flatten)]
    pub source: SourceArgs,

    /// Change point CSV; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// Also write the run-length log-probability matrix here.
    #[arg(long)]
    pub emit_runlength: Option<PathBuf>,

    /// Truncate trailing run lengths below this probability.
    #[arg(long, value_parser = parse_prune)]
    pub prune_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=6))]
    pub dataset: u32,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Series CSV (`t,value`).
    #[arg(long, short)]
    pub output: PathBuf,

    /// Truth sidecar; defaults to `<output stem>.truth.csv`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Dataset ids (`2`, `1,3`) or `all`.
    #[arg(long, default_value = "all", value_parser = parse_datasets)]
    pub dataset: std::vec::Vec<u32>,

    #[arg(long, default_value = "bocpd,bocpd-bls", value_parser = parse_algorithms)]
    pub algorithms: std::vec::Vec<Algorithm>,

    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub iterations: u64,

    /// Seed of iteration 0; iteration k uses seed + k.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Comma-separated lambda values.
    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<std::vec::Vec<f64>>,

    /// Writes `metrics.txt` and `metrics.csv` here; CSV goes to stdout otherwise.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long, default_value = "bocpd,bocpd-bls", value_parser = parse_algorithms)]
    pub algorithms: std::vec::Vec<Algorithm>,

    #[arg(long, value_parser = parse_grid)]
    pub lambda_grid: Option<std::vec::Vec<f64>>,

    /// Sweep CSV; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, short)]
    pub input: PathBuf,

    #[command(flatten)]
    pub read: ReadArgs,

    /// Normalized `timestamp,value` CSV; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CpdError::io(path, e))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn epoch_to_date(t: i64) -> Option<NaiveDate> {
    chrono::DateTime::from_timestamp(t, 0).map(|d| d.date_naive())
}

/// Reads a file according to the format, window and stride flags.
pub fn load_frame(path: &Path, read: &ReadArgs) -> Result<TimeSeriesFrame> {
    let frame = match read.format {
        InputFormat::Series => read_series_csv(
            path,
            &Column::parse(&read.time_column),
            &Column::parse(&read.value_column),
            !read.no_header,
        )?,
        InputFormat::Jhu => {
            let country = read
                .country
                .as_deref()
                .ok_or_else(|| CpdError::invalid("--format jhu requires --country"))?;
            let start = read.start.and_then(epoch_to_date).unwrap_or(NaiveDate::MIN);
            let end = read.end.and_then(epoch_to_date).unwrap_or(NaiveDate::MAX);
            extract_wide_row(path, country, start, end)?
        }
    };
    resample_every_k(&frame, read.every as usize, read.start, read.end)
}

fn load_values(source: &SourceArgs) -> Result<Vec<f64>> {
    match (&source.input, source.synth_dataset) {
        (Some(path), None) => Ok(load_frame(path, &source.read)?.values),
        (None, Some(id)) => Ok(generate(id, source.seed)?.values),
        _ => Err(CpdError::invalid("exactly one of --input / --synth-dataset is required")),
    }
}

pub fn cmd_detect(args: &DetectArgs) -> Result<()> {
    let values = load_values(&args.source)?;
    let mut config = DetectorConfig::new(args.algorithm.into(), args.lambda).with_prior(init_nig(args.prior_loc)?);
    if let Some(p) = args.prune_threshold {
        config = config.with_pruning(p);
    }
    let detection = detect_series_with(config, &values)?;
    output::write_events(sink(args.output.as_deref())?, &detection)?;
    if let Some(path) = &args.emit_runlength {
        output::write_matrix(create(path)?, &detection.matrix())?;
    }
    eprintln!(
        "{} change points in {} observations (algorithm={}, lambda={})",
        detection.change_points.len(),
        values.len(),
        config.algorithm,
        config.lambda
    );
    Ok(())
}

/// Default sidecar path: `out.csv` becomes `out.truth.csv`.
pub fn truth_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.truth.csv"))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let series = generate(args.dataset, args.seed)?;
    output::write_series(create(&args.output)?, &series)?;
    let truth = args.truth.clone().unwrap_or_else(|| truth_path(&args.output));
    output::write_truth(create(&truth)?, &series.truth)?;
    eprintln!(
        "dataset {} seed {}: {} points, truth in {}",
        args.dataset,
        args.seed,
        series.values.len(),
        truth.display()
    );
    Ok(())
}

pub fn run_validation(args: &ValidateArgs) -> Result<Vec<MetricsReport>> {
    let grid = args.lambda_grid.clone().unwrap_or_else(|| DEFAULT_LAMBDA_GRID.to_vec());
    let mut reports = Vec::new();
    for &id in &args.dataset {
        for &alg in &args.algorithms {
            reports.push(evaluate(id, alg, &grid, args.iterations as usize, args.seed)?);
        }
    }
    Ok(reports)
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let reports = run_validation(args)?;
    match &args.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| CpdError::io(dir, e))?;
            output::write_metrics_text(create(&dir.join("metrics.txt"))?, &reports)?;
            output::write_metrics_csv(create(&dir.join("metrics.csv"))?, &reports)?;
        }
        None => output::write_metrics_csv(sink(None)?, &reports)?,
    }
    eprintln!("{:<8} {:<10} {:>8} {:>7} {:>7} {:>7}", "dataset", "algorithm", "F", "Miss", "Delay", "Dup");
    for r in &reports {
        let p = &r.pooled;
        eprintln!(
            "{:<8} {:<10} {:>8.3} {:>7.2} {:>7.2} {:>7.2}",
            r.dataset_id, r.algorithm, p.f_score.mean, p.miss.mean, p.delay.mean, p.duplication.mean
        );
    }
    Ok(())
}

pub fn run_sweep(args: &SweepArgs) -> Result<Vec<(Algorithm, f64, Vec<usize>)>> {
    let values = load_values(&args.source)?;
    let grid = args.lambda_grid.clone().unwrap_or_else(|| SWEEP_LAMBDA_GRID.to_vec());
    let mut rows = Vec::with_capacity(args.algorithms.len() * grid.len());
    for &alg in &args.algorithms {
        for &lambda in &grid {
            let d = detect_series_with(DetectorConfig::new(alg, lambda), &values)?;
            rows.push((alg, lambda, d.change_points));
        }
    }
    Ok(rows)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let rows = run_sweep(args)?;
    output::write_sweep(sink(args.output.as_deref())?, &rows)?;
    eprintln!("{} sweep rows", rows.len());
    Ok(())
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<()> {
    let frame = load_frame(&args.input, &args.read)?;
    output::write_frame(sink(args.output.as_deref())?, &frame)?;
    eprintln!("{} rows ({} skipped) from {}", frame.len(), frame.skipped_rows, frame.source_label);
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Ingest(a) => cmd_ingest(a),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
