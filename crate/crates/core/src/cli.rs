//! The `rankfn` command line.
//!
//! Every subcommand reads its inputs, writes its outputs into `--out`, and
//! records a `run.json` with the effective configuration. A plain-text
//! `key = value` file passed with `--config` supplies defaults for any flag
//! (keys are long flag names, plus `command` to name the subcommand); flags
//! given on the command line win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::builder::PossibleValue;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::complexes::{
    bifiltration_grid, distance_matrix, sublevel_filtration, vietoris_rips, BifiltrationInput, BifiltrationKind,
    PointCloud,
};
use crate::error::{Error, Result};
use crate::io;
use crate::learn::{
    cross_validate, EvalReport, FunctionalDataset, KernelSpec, KnnPipeline, MbdPipeline, Pipeline, Projection,
    SvmParams, SvmPipeline, DEFAULT_BAND_SIZE, DEFAULT_HAAR_LEVELS, DEFAULT_MAX_COMPONENTS,
    DEFAULT_VARIANCE_THRESHOLD,
};
use crate::metrics::{bottleneck, landscape_distance, lp_distance, rank_lp_distance_exact, wasserstein};
use crate::persistence::{
    barcode_to_diagram, compute_persistence, compute_persistence_with_cap, diagram_from_rank, rips_barcode,
    PersistenceDiagram,
};
use crate::rank::{landscape, landscape_grid, rank_from_diagram, rank_invariant, truncate, GridSpec, RankGrid};
use crate::stability::{
    counterexample_sweep, truncated_suite, wasserstein_suite, ConstantSource, StabilityReport, SuiteSummary, Verdict,
    COARSE_RESOLUTION, DEFAULT_SWEEP,
};
use crate::synth::{NegativeShape, ShapeDataset};

pub const RUN_SCHEMA: &str = "rankfn-run/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) => EXIT_PARSE,
            Error::InvalidInput(_) | Error::Precondition(_) | Error::GridMismatch(_) | Error::NotConverged { .. } => {
                EXIT_PRECONDITION
            }
            Error::Invariant(_) => EXIT_INVARIANT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Persistent homology rank functions: filtrations, diagrams, distances,
/// stability checks and classifiers.
#[derive(Parser, Debug)]
#[command(name = "rankfn", version, args_override_self = true)]
pub struct Cli {
    /// key = value file supplying defaults for any flag of the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads; 0 or unset uses every core.
    #[arg(long, global = true, env = "RANKFN_THREADS")]
    pub threads: Option<usize>,

    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Vietoris-Rips diagram of a point cloud CSV.
    Rips(RipsArgs),
    /// Sublevel-set diagram of a single-column time series CSV.
    Sublevel(SublevelArgs),
    /// Rank invariant of a degree-Rips or height-Rips bifiltration.
    Bifiltration(BifiltrationArgs),
    /// Diagram recovered from a rank grid or computed from a filtration dump.
    Diagram(DiagramArgs),
    /// Rank grid of a diagram.
    Rank(RankArgs),
    /// Distance between two diagrams.
    Distance(DistanceArgs),
    /// Randomized checks of the rank-function stability bounds.
    StabilityCheck(StabilityArgs),
    /// Cross-validated classification of rank functions.
    Classify(ClassifyArgs),
    /// Persistence landscapes of a diagram.
    Landscape(LandscapeArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rips(_) => "rips",
            Command::Sublevel(_) => "sublevel",
            Command::Bifiltration(_) => "bifiltration",
            Command::Diagram(_) => "diagram",
            Command::Rank(_) => "rank",
            Command::Distance(_) => "distance",
            Command::StabilityCheck(_) => "stability-check",
            Command::Classify(_) => "classify",
            Command::Landscape(_) => "landscape",
        }
    }
}

#[derive(Args, Debug)]
pub struct RipsArgs {
    /// Point cloud CSV (required).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Highest homology degree.
    #[arg(long, default_value_t = 1)]
    pub max_degree: usize,
    /// Largest edge length admitted.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub max_scale: f64,
    /// Death value of essential classes; defaults to the longest edge.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Also write the filtration as filtration.csv (uses the boundary-matrix path).
    #[arg(long)]
    pub dump_filtration: bool,
    /// Keep a uniform random subsample of this many points.
    #[arg(long)]
    pub landmarks: Option<usize>,
    /// Seed for the landmark subsample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SublevelArgs {
    /// Time series CSV (required).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Also write the filtration as filtration.csv.
    #[arg(long)]
    pub dump_filtration: bool,
}

#[derive(Args, Debug)]
pub struct BifiltrationArgs {
    /// Point cloud CSV (required).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_kind, default_value = "degree-rips")]
    pub kind: BifiltrationKind,
    /// Scale axis: `a,b,c` or `start:stop:count` (required).
    #[arg(long)]
    pub scales: Option<String>,
    /// Degree thresholds or heights, same syntax (required).
    #[arg(long)]
    pub axis2: Option<String>,
    /// Homology degree of the rank invariant.
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    /// Keep a uniform random subsample of this many points.
    #[arg(long)]
    pub landmarks: Option<usize>,
    /// Seed for the landmark subsample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_kind(s: &str) -> std::result::Result<BifiltrationKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct DiagramArgs {
    /// Rank grid JSON to invert.
    #[arg(long, conflicts_with = "filtration")]
    pub rank: Option<PathBuf>,
    /// Filtration dump CSV to reduce.
    #[arg(long)]
    pub filtration: Option<PathBuf>,
    /// Highest homology degree for --filtration.
    #[arg(long, default_value_t = 1)]
    pub max_degree: usize,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    /// Diagram CSV (required).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Homology degree.
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    /// Grid resolution G.
    #[arg(long = "G", default_value_t = 100)]
    pub resolution: usize,
    /// Lower grid bound; defaults to min(0, smallest birth).
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Upper grid bound; defaults to the diagram cap.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Truncate to y > x + delta.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Bottleneck,
    Wasserstein,
    /// L^p distance of rank functions on a shared grid.
    Lp,
    /// L^p distance of rank functions integrated exactly.
    LpExact,
    Landscape,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    /// First diagram CSV (required).
    #[arg(long)]
    pub a: Option<PathBuf>,
    /// Second diagram CSV (required).
    #[arg(long)]
    pub b: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Metric::Bottleneck)]
    pub metric: Metric,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Homology degree.
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    /// Grid resolution for --metric lp.
    #[arg(long = "G", default_value_t = 100)]
    pub resolution: usize,
    /// Truncation for the rank metrics.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Number of landscapes for --metric landscape.
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
    /// Sample count in t for --metric landscape.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

/// Which stability statement to exercise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prop {
    /// Truncated rank functions against the bottleneck distance.
    Truncated,
    /// Rank functions against the 1-Wasserstein distance.
    Wasserstein,
    /// The widened-interval family that breaks Hölder stability for p >= 2.
    Counterexample,
}

impl ValueEnum for Prop {
    fn value_variants<'a>() -> &'a [Self] {
        &[Prop::Truncated, Prop::Wasserstein, Prop::Counterexample]
    }

    fn to_possible_value(&self) -> Option<PossibleValue> {
        Some(match self {
            Prop::Truncated => PossibleValue::new("truncated").alias("10"),
            Prop::Wasserstein => PossibleValue::new("wasserstein").alias("12"),
            Prop::Counterexample => PossibleValue::new("counterexample").alias("14"),
        })
    }
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    #[arg(long, value_enum)]
    pub prop: Option<Prop>,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Truncation values, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0])]
    pub delta: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Interval endpoints for the counterexample sweep.
    #[arg(long, default_value_t = 0.0)]
    pub birth: f64,
    #[arg(long, default_value_t = 1.0)]
    pub death: f64,
    /// Widening values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    /// Grid resolution of the counterexample quadrature.
    #[arg(long = "G", default_value_t = 200)]
    pub resolution: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PipelineKind {
    Svm,
    Knn,
    Mbd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Linear,
    Polynomial,
    Grbf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProjKind {
    None,
    Pca,
    Haar,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// CSV of `path,label` rows; paths are rank grid JSON files or time
    /// series CSVs (degree-0 sublevel rank functions), relative to the
    /// manifest.
    #[arg(long, conflicts_with = "synthetic")]
    pub manifest: Option<PathBuf>,
    /// Generate circles against discs or blobs instead of reading files.
    #[arg(long, value_enum)]
    pub synthetic: Option<SyntheticKind>,
    #[arg(long, default_value_t = 40)]
    pub per_class: usize,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    /// Grid resolution of generated or time-series rank functions.
    #[arg(long = "G", default_value_t = 32)]
    pub resolution: usize,
    #[arg(long, value_enum, default_value_t = PipelineKind::Svm)]
    pub pipeline: PipelineKind,
    #[arg(long, value_enum, default_value_t = KernelKind::Polynomial)]
    pub kernel: KernelKind,
    /// Polynomial degree.
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    /// GRBF width; defaults to the inverse weighted feature variance.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Regularization values, comma separated; each is cross-validated.
    #[arg(long = "C", value_delimiter = ',', default_values_t = [1.0])]
    pub c: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = ProjKind::None)]
    pub proj: ProjKind,
    #[arg(long, default_value_t = DEFAULT_VARIANCE_THRESHOLD)]
    pub var_threshold: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_COMPONENTS)]
    pub max_components: usize,
    #[arg(long, default_value_t = DEFAULT_HAAR_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long = "J", default_value_t = DEFAULT_BAND_SIZE)]
    pub j: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SyntheticKind {
    Disc,
    Blob,
}

#[derive(Args, Debug)]
pub struct LandscapeArgs {
    /// Diagram CSV (required).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    #[arg(long, default_value_t = 5)]
    pub k_max: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Lower end of the t grid; defaults to the smallest birth.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Upper end; defaults to the cap.
    #[arg(long)]
    pub t_max: Option<f64>,
}

/// Parsed `key = value` configuration.
///
/// The canonical form lists `command` first, then the other keys sorted,
/// one `key = value` per line; parsing it again yields the same value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Option<String>,
    pub entries: BTreeMap<String, String>,
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse(format!("config line {}: expected key = value", n + 1)));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(Error::Parse(format!("config line {}: bad key {k:?}", n + 1)));
            }
            if k == "command" {
                if cfg.command.replace(v.to_string()).is_some() {
                    return Err(Error::Parse("config: duplicate key \"command\"".into()));
                }
            } else if cfg.entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Parse(format!("config: duplicate key {k:?}")));
            }
        }
        Ok(cfg)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.command {
            writeln!(f, "command = {c}")?;
        }
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

const GLOBAL_VALUE_FLAGS: [&str; 3] = ["--config", "--out", "--threads"];

/// Position of the subcommand token; only global flags may precede it.
fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if GLOBAL_VALUE_FLAGS.contains(&a.as_ref()) {
            i += 2;
        } else if a.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let pos = subcommand_position(args).unwrap_or(args.len());
    let mut it = args.iter().enumerate().skip(1);
    while let Some((i, a)) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return args.get(i + 1).map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
        if i > pos && s == "--" {
            break;
        }
    }
    None
}

/// Splices config entries into `args` as flags for every key not given on
/// the command line.
fn merge_config(mut args: Vec<OsString>, cfg: &RunConfig) -> CliResult<Vec<OsString>> {
    let names: Vec<String> = Cli::command().get_subcommands().map(|c| c.get_name().to_string()).collect();
    let given = subcommand_position(&args).filter(|&i| names.iter().any(|n| args[i].to_string_lossy() == n.as_str()));
    if let Some(c) = &cfg.command {
        match given {
            Some(i) if args[i].to_string_lossy() != c.as_str() => {
                return Err(Failure::usage(format!(
                    "config names command {c:?} but {:?} was given",
                    args[i].to_string_lossy()
                )))
            }
            Some(_) => {}
            None => args.insert(1, c.into()),
        }
    }
    let Some(pos) = subcommand_position(&args) else {
        return Ok(args);
    };
    let sub_name = args[pos].to_string_lossy().to_string();
    if !names.contains(&sub_name) {
        return Ok(args);
    }
    let root = Cli::command();
    let sub = root.find_subcommand(&sub_name).expect("known subcommand").clone();
    let matches = Cli::command()
        .ignore_errors(true)
        .try_get_matches_from(&args)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let sub_matches = matches.subcommand_matches(&sub_name);
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in &cfg.entries {
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Failure::parse(format!("config: unknown key {key:?} for {sub_name}")))?;
        if key == "config" {
            return Err(Failure::parse("config: a config file cannot name another"));
        }
        let id = arg.get_id().as_str();
        let source = sub_matches.and_then(|m| m.try_contains_id(id).ok().and_then(|_| m.value_source(id)));
        if source == Some(ValueSource::CommandLine) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}").into());
            extra.push(value.into());
        } else {
            match value.as_str() {
                "true" => extra.push(format!("--{key}").into()),
                "false" => {}
                other => return Err(Failure::parse(format!("config: {key} expects true or false, got {other:?}"))),
            }
        }
    }
    // Placed before the user's own flags, which therefore win on any overlap.
    let tail = args.split_off(pos + 1);
    args.extend(extra);
    args.extend(tail);
    Ok(args)
}

/// The effective value of every argument of the chosen subcommand.
fn effective_config(matches: &ArgMatches, command: &str) -> RunConfig {
    let root = Cli::command();
    let sub = root.find_subcommand(command).expect("known subcommand");
    let sm = matches.subcommand_matches(command).expect("subcommand matched");
    let mut entries = BTreeMap::new();
    for arg in sub.get_arguments().chain(root.get_arguments()) {
        let (Some(long), id) = (arg.get_long(), arg.get_id().as_str()) else {
            continue;
        };
        if matches!(long, "config" | "help" | "version") {
            continue;
        }
        let Ok(Some(raw)) = sm.try_get_raw(id) else { continue };
        let values: Vec<String> = raw.map(|v| v.to_string_lossy().to_string()).collect();
        let value = if arg.get_action().takes_values() {
            values.join(",")
        } else {
            match sm.get_flag(id) {
                true => "true".into(),
                false => "false".into(),
            }
        };
        entries.insert(long.to_string(), value);
    }
    RunConfig {
        command: Some(command.to_string()),
        entries,
    }
}

/// Entry point of the binary; returns the exit status.
pub fn main() -> i32 {
    run(std::env::args_os().collect(), &mut std::io::stdout().lock())
}

/// Runs the command line in `args` (including the program name), writing
/// human-readable output to `stdout`.
pub fn run(args: Vec<OsString>, stdout: &mut dyn Write) -> i32 {
    match try_run(args, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("rankfn: {f}");
            f.code
        }
    }
}

fn try_run(args: Vec<OsString>, stdout: &mut dyn Write) -> CliResult<()> {
    let cfg = match config_path(&args) {
        Some(p) => fs::read_to_string(&p)
            .map_err(|e| Failure::parse(format!("cannot read config {}: {e}", p.display())))?
            .parse::<RunConfig>()?,
        None => RunConfig::default(),
    };
    let args = merge_config(args, &cfg)?;
    let matches = match Cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(stdout, "{e}").map_err(Error::from)?;
                return Ok(());
            }
            let _ = e.print();
            return Err(Failure::usage("invalid command line"));
        }
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| Failure::usage(e.to_string()))?;
    let command = cli.command.name();
    let effective = effective_config(&matches, command);

    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start {threads} threads: {e}")))?;
    fs::create_dir_all(&cli.out).map_err(Error::from)?;

    let started = SystemTime::now();
    let clock = Instant::now();
    let mut ctx = Ctx {
        out: cli.out.clone(),
        outputs: Vec::new(),
        stdout: Vec::new(),
    };
    let seed = match &cli.command {
        Command::Rips(a) if a.landmarks.is_some() => Some(a.seed),
        Command::Bifiltration(a) if a.landmarks.is_some() => Some(a.seed),
        Command::StabilityCheck(a) => Some(a.seed),
        Command::Classify(a) => Some(a.seed),
        _ => None,
    };
    let result = pool.install(|| dispatch(&cli.command, &mut ctx));
    let record = json!({
        "schema": RUN_SCHEMA,
        "command": command,
        "config": effective.entries,
        "config_text": effective.to_string(),
        "seed": seed,
        "versions": { "rankfn": env!("CARGO_PKG_VERSION") },
        "threads": pool.current_num_threads(),
        "outputs": ctx.outputs,
        "status": result.as_ref().map_or_else(|f| f.code, |_| EXIT_OK),
        "started_unix_ms": started.duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0),
        "wall_clock_seconds": clock.elapsed().as_secs_f64(),
    });
    stdout.write_all(&ctx.stdout).map_err(Error::from)?;
    io::write_json_file(&cli.out.join("run.json"), &record)?;
    result
}

struct Ctx {
    out: PathBuf,
    outputs: Vec<String>,
    stdout: Vec<u8>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn say(&mut self, line: impl fmt::Display) -> CliResult<()> {
        writeln!(self.stdout, "{line}").map_err(Error::from)?;
        Ok(())
    }
}

fn need<'a, T>(v: &'a Option<T>, flag: &str) -> CliResult<&'a T> {
    v.as_ref().ok_or_else(|| Failure::usage(format!("missing required flag --{flag}")))
}

fn dispatch(command: &Command, ctx: &mut Ctx) -> CliResult<()> {
    match command {
        Command::Rips(a) => cmd_rips(a, ctx),
        Command::Sublevel(a) => cmd_sublevel(a, ctx),
        Command::Bifiltration(a) => cmd_bifiltration(a, ctx),
        Command::Diagram(a) => cmd_diagram(a, ctx),
        Command::Rank(a) => cmd_rank(a, ctx),
        Command::Distance(a) => cmd_distance(a, ctx),
        Command::StabilityCheck(a) => cmd_stability(a, ctx),
        Command::Classify(a) => cmd_classify(a, ctx),
        Command::Landscape(a) => cmd_landscape(a, ctx),
    }
}

fn write_diagram(d: &PersistenceDiagram, ctx: &mut Ctx) -> CliResult<()> {
    let path = ctx.path("diagram.csv");
    io::write_diagram_file(&path, d)?;
    let counts: Vec<String> = (0..d.degrees()).map(|q| format!("H{q}:{}", d.degree(q).len())).collect();
    ctx.say(format!("diagram {} cap={}", counts.join(" "), d.cap()))
}

/// Reads a cloud, optionally keeping `landmarks` points chosen uniformly
/// without replacement.
fn read_cloud(input: &Option<PathBuf>, landmarks: Option<usize>, seed: u64) -> CliResult<PointCloud> {
    let pc = io::read_point_cloud_file(need(input, "input")?)?;
    let Some(n) = landmarks else { return Ok(pc) };
    if n == 0 || n > pc.len() {
        return Err(Error::InvalidInput(format!("--landmarks {n} must lie in 1..={}", pc.len())).into());
    }
    let pts: Vec<&[f64]> = pc.points().collect();
    let mut picked = rand::seq::index::sample(&mut ChaCha8Rng::seed_from_u64(seed), pc.len(), n).into_vec();
    picked.sort_unstable();
    Ok(PointCloud::new(picked.into_iter().map(|i| pts[i].to_vec()).collect())?)
}

fn cmd_rips(a: &RipsArgs, ctx: &mut Ctx) -> CliResult<()> {
    let pc = read_cloud(&a.input, a.landmarks, a.seed)?;
    let dm = distance_matrix(&pc);
    let diagram = if a.dump_filtration || a.max_degree > 2 {
        let f = vietoris_rips(&dm, a.max_degree + 1, a.max_scale)?;
        if a.dump_filtration {
            io::write_filtration_file(&ctx.path("filtration.csv"), &f)?;
        }
        let b = match a.cap {
            Some(cap) => compute_persistence_with_cap(&f, a.max_degree, cap)?,
            None => compute_persistence(&f, a.max_degree)?,
        };
        barcode_to_diagram(&b)
    } else {
        barcode_to_diagram(&rips_barcode(&dm, a.max_degree, a.max_scale, a.cap)?)
    };
    write_diagram(&diagram, ctx)
}

fn cmd_sublevel(a: &SublevelArgs, ctx: &mut Ctx) -> CliResult<()> {
    let ts = io::read_time_series_file(need(&a.input, "input")?)?;
    let f = sublevel_filtration(&ts);
    if a.dump_filtration {
        io::write_filtration_file(&ctx.path("filtration.csv"), &f)?;
    }
    write_diagram(&barcode_to_diagram(&compute_persistence(&f, 0)?), ctx)
}

/// `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_axis(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parse(format!("bad axis {s:?}"));
    if let Some((start, rest)) = s.split_once(':') {
        let (stop, count) = rest.split_once(':').ok_or_else(bad)?;
        let (start, stop): (f64, f64) = (start.trim().parse().map_err(|_| bad())?, stop.trim().parse().map_err(|_| bad())?);
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        return match count {
            0 => Err(bad()),
            1 => Ok(vec![start]),
            _ => landscape_grid(start, stop, count),
        };
    }
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn cmd_bifiltration(a: &BifiltrationArgs, ctx: &mut Ctx) -> CliResult<()> {
    let pc = read_cloud(&a.input, a.landmarks, a.seed)?;
    let axis1 = parse_axis(need(&a.scales, "scales")?)?;
    let axis2 = parse_axis(need(&a.axis2, "axis2")?)?;
    let grid = bifiltration_grid(BifiltrationInput::Cloud(&pc), a.kind, &axis1, &axis2, a.degree + 1)?;
    let ranks = rank_invariant(&grid, a.degree)?;
    io::write_birank_grid_file(&ctx.path("birank.json"), &ranks)?;
    ctx.say(format!(
        "rank invariant H{} on a {}x{} grid, {} comparable pairs",
        a.degree,
        axis1.len(),
        axis2.len(),
        ranks.pairs().count()
    ))
}

fn cmd_diagram(a: &DiagramArgs, ctx: &mut Ctx) -> CliResult<()> {
    let d = match (&a.rank, &a.filtration) {
        (Some(r), _) => diagram_from_rank(&io::read_rank_grid_file(r)?)?,
        (None, Some(f)) => barcode_to_diagram(&compute_persistence(&io::read_filtration_file(f)?, a.max_degree)?),
        (None, None) => return Err(Failure::usage("need --rank or --filtration")),
    };
    write_diagram(&d, ctx)
}

fn grid_for(d: &PersistenceDiagram, t_min: Option<f64>, t_max: Option<f64>, g: usize) -> Result<GridSpec> {
    let default = GridSpec::default_for(d)?;
    GridSpec::new(t_min.unwrap_or(default.t_min), t_max.unwrap_or(default.t_max), g)
}

fn cmd_rank(a: &RankArgs, ctx: &mut Ctx) -> CliResult<()> {
    let d = io::read_diagram_file(need(&a.input, "input")?)?;
    let spec = grid_for(&d, a.t_min, a.t_max, a.resolution)?;
    let mut r = rank_from_diagram(&d, a.degree, spec)?;
    if let Some(delta) = a.delta {
        r = truncate(&r, delta)?;
    }
    io::write_rank_grid_file(&ctx.path("rank.json"), &r)?;
    ctx.say(format!("rank H{} G={} mass={}", a.degree, a.resolution, r.mass()))
}

fn shared_grids(d1: &PersistenceDiagram, d2: &PersistenceDiagram, a: &DistanceArgs) -> Result<(RankGrid, RankGrid)> {
    let u = d1.union(d2);
    let spec = GridSpec::default_for(&u)?;
    let mut r1 = rank_from_diagram(&d1.with_cap(u.cap())?, a.degree, GridSpec { resolution: a.resolution, ..spec })?;
    let mut r2 = rank_from_diagram(&d2.with_cap(u.cap())?, a.degree, r1.spec())?;
    if let Some(delta) = a.delta {
        r1 = truncate(&r1, delta)?;
        r2 = truncate(&r2, delta)?;
    }
    Ok((r1, r2))
}

fn cmd_distance(a: &DistanceArgs, ctx: &mut Ctx) -> CliResult<()> {
    let d1 = io::read_diagram_file(need(&a.a, "a")?)?;
    let d2 = io::read_diagram_file(need(&a.b, "b")?)?;
    let (value, certificate) = match a.metric {
        Metric::Bottleneck => {
            let (v, c) = bottleneck(&d1, &d2, a.degree)?;
            (v, Some(c))
        }
        Metric::Wasserstein => {
            let (v, c) = wasserstein(&d1, &d2, a.degree, a.p)?;
            (v, Some(c))
        }
        Metric::Lp => {
            let (r1, r2) = shared_grids(&d1, &d2, a)?;
            (lp_distance(&r1, &r2, a.p)?, None)
        }
        Metric::LpExact => (rank_lp_distance_exact(&d1, &d2, a.degree, a.p, a.delta.unwrap_or(0.0))?, None),
        Metric::Landscape => {
            let u = d1.union(&d2);
            let ts = landscape_grid(u.min_birth().min(0.0), u.cap(), a.samples)?;
            let l1 = landscape(&d1, a.degree, a.k_max, &ts)?;
            let l2 = landscape(&d2, a.degree, a.k_max, &ts)?;
            (landscape_distance(&l1, &l2, a.p)?, None)
        }
    };
    let mut record = json!({ "metric": a.metric, "p": a.p, "degree": a.degree, "value": value });
    if let Some(c) = certificate {
        record["certificate"] = serde_json::to_value(c).map_err(Error::from)?;
    }
    io::write_json_file(&ctx.path("distance.json"), &record)?;
    ctx.say(format!("{:?} distance {value}", a.metric).to_lowercase())
}

fn json_line<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serde_json::to_string(v).map_err(Error::from)?)
}

fn cmd_stability(a: &StabilityArgs, ctx: &mut Ctx) -> CliResult<()> {
    let prop = *need(&a.prop, "prop")?;
    if prop == Prop::Counterexample {
        let eps: Vec<f64> = if a.eps.is_empty() { DEFAULT_SWEEP.to_vec() } else { a.eps.clone() };
        let rows = counterexample_sweep(a.birth, a.death, &eps, a.p, a.resolution)?;
        let path = ctx.path("sweep.csv");
        let mut w = csv::Writer::from_path(&path).map_err(Error::from)?;
        for r in &rows {
            w.serialize(r).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
        ctx.say("eps,p,omega,quadrature,rel_error,bound,verdict")?;
        for r in &rows {
            let rel = if r.exceeds { ">" } else { "<=" };
            ctx.say(format!(
                "{},{},{},{:.6},{:.2e},{},{} {rel} {}",
                r.eps, r.p, r.omega, r.omega_quadrature, r.relative_error, r.bound, r.omega, r.bound
            ))?;
        }
        let found = rows.iter().filter(|r| r.exceeds).count();
        return ctx.say(format!("summary: {found} of {} widths exceed C(b,d) eps^p", rows.len()));
    }
    let reports: Vec<StabilityReport> = match prop {
        Prop::Truncated => truncated_suite(a.trials, a.p, &a.delta, a.seed)?,
        _ => wasserstein_suite(a.trials, a.p, a.seed)?,
    };
    let path = ctx.path("trials.jsonl");
    let mut lines = String::new();
    for r in &reports {
        let line = json_line(r)?;
        lines.push_str(&line);
        lines.push('\n');
        ctx.say(line)?;
    }
    fs::write(&path, lines).map_err(Error::from)?;
    let summaries: Vec<SuiteSummary> = match prop {
        Prop::Truncated => vec![SuiteSummary::summarize(&reports)],
        _ => [ConstantSource::Remark, ConstantSource::Proof]
            .iter()
            .map(|s| SuiteSummary::summarize(reports.iter().filter(|r| r.source == *s)))
            .collect(),
    };
    io::write_json_file(&ctx.path("summary.json"), &summaries)?;
    for s in &summaries {
        ctx.say(format!("summary: {}", json_line(s)?))?;
    }
    // A proof-constant violation breaks the bound itself; remark-constant
    // violations are evidence about the stated constant, not failures.
    let binding = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Violated && (prop == Prop::Truncated || r.source == ConstantSource::Proof))
        .count();
    if binding > 0 {
        return Err(Failure {
            code: EXIT_INVARIANT,
            message: format!("{binding} violations of the bound (grid G={COARSE_RESOLUTION} escalated)"),
        });
    }
    Ok(())
}

/// Reads a `path,label` manifest into a dataset.
fn manifest_dataset(path: &Path, resolution: usize) -> CliResult<FunctionalDataset> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(Error::from)?;
    let mut entries = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        if k == 0 && rec.get(1).is_some_and(|l| l.parse::<i8>().is_err()) {
            continue;
        }
        if rec.len() != 2 {
            return Err(Failure::parse(format!("manifest row {} must be path,label", k + 1)));
        }
        let label: i8 = match &rec[1] {
            "1" | "+1" => 1,
            "-1" => -1,
            other => return Err(Failure::parse(format!("manifest label {other:?} is not +1 or -1"))),
        };
        entries.push((base.join(&rec[0]), label));
    }
    let labels: Vec<i8> = entries.iter().map(|e| e.1).collect();
    let json = entries.iter().all(|e| e.0.extension().is_some_and(|x| x == "json"));
    let grids = if json {
        entries.iter().map(|e| io::read_rank_grid_file(&e.0)).collect::<Result<Vec<_>>>()?
    } else {
        // Time series: degree-0 sublevel rank functions on one shared grid.
        let diagrams = entries
            .iter()
            .map(|e| Ok(barcode_to_diagram(&compute_persistence(&sublevel_filtration(&io::read_time_series_file(&e.0)?), 0)?)))
            .collect::<Result<Vec<_>>>()?;
        let lo = diagrams.iter().map(|d| d.min_birth()).fold(f64::INFINITY, f64::min);
        let hi = diagrams.iter().map(|d| d.cap()).fold(f64::NEG_INFINITY, f64::max);
        let spec = GridSpec::new(lo, hi, resolution)?;
        diagrams
            .iter()
            .map(|d| rank_from_diagram(&d.with_cap(hi)?, 0, spec))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(FunctionalDataset::from_rank_grids(&grids, labels)?)
}

fn cmd_classify(a: &ClassifyArgs, ctx: &mut Ctx) -> CliResult<()> {
    let ds = match (&a.manifest, a.synthetic) {
        (Some(m), _) => manifest_dataset(m, a.resolution)?,
        (None, Some(kind)) => {
            let cfg = ShapeDataset {
                negative: match kind {
                    SyntheticKind::Disc => NegativeShape::Disc,
                    SyntheticKind::Blob => NegativeShape::Blob,
                },
                per_class: a.per_class,
                points: a.points,
                noise: a.noise,
                resolution: a.resolution,
                ..ShapeDataset::default()
            };
            let (grids, labels) = cfg.generate(a.seed)?;
            FunctionalDataset::from_rank_grids(&grids, labels)?
        }
        (None, None) => return Err(Failure::usage("need --manifest or --synthetic")),
    };
    let projection = match a.proj {
        ProjKind::None => Projection::None,
        ProjKind::Pca => Projection::Pca {
            threshold: a.var_threshold,
            max_components: a.max_components,
        },
        ProjKind::Haar => Projection::Haar { levels: a.levels },
    };
    let kernel = match a.kernel {
        KernelKind::Linear => KernelSpec::Linear,
        KernelKind::Polynomial => KernelSpec::Polynomial { degree: a.degree },
        KernelKind::Grbf => KernelSpec::Grbf { gamma: a.gamma },
    };
    let pipelines: Vec<Box<dyn Pipeline>> = match a.pipeline {
        PipelineKind::Svm => {
            if a.c.is_empty() {
                return Err(Failure::usage("--C needs at least one value"));
            }
            a.c.iter()
                .map(|&c| {
                    Box::new(SvmPipeline {
                        kernel,
                        params: SvmParams {
                            c,
                            tol: a.tol,
                            ..SvmParams::default()
                        },
                        projection,
                    }) as Box<dyn Pipeline>
                })
                .collect()
        }
        PipelineKind::Knn => vec![Box::new(KnnPipeline { k: a.k })],
        PipelineKind::Mbd => vec![Box::new(MbdPipeline { j: a.j })],
    };
    let reports = pipelines
        .iter()
        .map(|p| cross_validate(&ds, p.as_ref(), a.folds, a.iterations, a.seed))
        .collect::<Result<Vec<EvalReport>>>()?;
    // Highest accuracy, then AUC; earlier grid values win ties.
    let best = reports
        .iter()
        .enumerate()
        .max_by(|(i, x), (j, y)| {
            x.accuracy
                .total_cmp(&y.accuracy)
                .then(x.auc_roc.total_cmp(&y.auc_roc))
                .then(j.cmp(i))
        })
        .map(|(i, _)| i)
        .expect("at least one pipeline");
    io::write_json_file(&ctx.path("report.json"), &reports[best])?;
    let mut table = format!("{}\n", EvalReport::CSV_HEADER);
    for r in &reports {
        table.push_str(&r.csv_row());
        table.push('\n');
    }
    fs::write(ctx.path("report.csv"), &table).map_err(Error::from)?;
    if reports.len() > 1 {
        io::write_json_file(&ctx.path("grid.json"), &reports)?;
    }
    ctx.say(table.trim_end())
}

fn cmd_landscape(a: &LandscapeArgs, ctx: &mut Ctx) -> CliResult<()> {
    let d = io::read_diagram_file(need(&a.input, "input")?)?;
    let pts = d.degree(a.degree);
    let lo = a
        .t_min
        .unwrap_or_else(|| pts.iter().map(|p| p.birth).fold(f64::INFINITY, f64::min).min(d.cap()));
    let hi = a.t_max.unwrap_or(d.cap());
    let ts = landscape_grid(lo, hi, a.samples)?;
    let ls = landscape(&d, a.degree, a.k_max, &ts)?;
    io::write_landscapes_file(&ctx.path("landscape.csv"), &ls)?;
    let peak = ls.first().map_or(0.0, |l| l.values.iter().copied().fold(0.0, f64::max));
    ctx.say(format!("landscapes k=1..{} on {} samples, max lambda_1 = {peak}", a.k_max, a.samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_canonically() {
        let text = "# experiment\n seed = 7\ncommand=classify\nC = 0.1,1,10\n\nkernel= linear\n";
        let cfg: RunConfig = text.parse().unwrap();
        let canon = cfg.to_string();
        assert_eq!(canon, "command = classify\nC = 0.1,1,10\nkernel = linear\nseed = 7\n");
        assert_eq!(canon.parse::<RunConfig>().unwrap(), cfg);
        assert!("seed = 1\nseed = 2".parse::<RunConfig>().is_err());
        assert!("no equals sign".parse::<RunConfig>().is_err());
    }

    #[test]
    fn axes_parse() {
        assert_eq!(parse_axis("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_axis("1, 2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert!(parse_axis("1:2").is_err());
        assert!(parse_axis("a,b").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn config_keys_are_spliced_after_the_subcommand() {
        let cfg: RunConfig = "command = rank\nG = 10\ndegree = 1".parse().unwrap();
        let args: Vec<OsString> = ["rankfn", "--out", "x", "--degree", "2"].iter().map(OsString::from).collect();
        let merged = merge_config(args, &cfg).unwrap();
        let merged: Vec<String> = merged.iter().map(|s| s.to_string_lossy().into()).collect();
        assert_eq!(merged, ["rankfn", "rank", "--G", "10", "--out", "x", "--degree", "2"]);
        let bad: RunConfig = "bogus = 1".parse().unwrap();
        let args: Vec<OsString> = ["rankfn", "rank"].iter().map(OsString::from).collect();
        assert_eq!(merge_config(args, &bad).unwrap_err().code, EXIT_PARSE);
    }
}
