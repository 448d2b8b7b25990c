use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use condiid::bounds::{thm4_bounds, vc_bounds, BoundReport, ShatterFunction};
use condiid::data::{generate, BlockRule, Occupancy};
use condiid::harness::{
    csv_string, output_dir, run, CounterexampleSettings, ExperimentConfig, ExperimentKind, OutputFormat,
};
use serde_json::json;

const PREDICATE_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "condiid", version, about = "Pattern recognition experiments on conditionally i.i.d. data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the config's `output_dir`, else `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    Remark1,
    Remark2,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one labelled sample from the config's process and pair.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Sample size; defaults to the first entry of `n_list`.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Error curve of the config's classifier (a consistency run).
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
    /// Tolerance-to-data distribution.
    Tolerance {
        #[command(flatten)]
        common: Common,
    },
    /// Bound calculator; needs no config.
    Bounds(BoundsArgs),
    /// Counterexample constructions, from a config or a built-in preset.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, conflicts_with = "config")]
        construction: Option<Construction>,
    },
    /// Run the experiment the config describes.
    Experiment {
        #[command(flatten)]
        common: Common,
    },
    /// Print configuration diagnostics.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct BoundsArgs {
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// `intervals`, `k-intervals:K`, `sauer:V` or `finite:M`.
    #[arg(long, default_value = "intervals")]
    shatter: String,
    /// Use the bounds for a class containing the labelling function.
    #[arg(long)]
    realizable: bool,
    /// Occupancy probability C_n of the label frequency band.
    #[arg(long, default_value_t = 1.0)]
    c_n: f64,
    /// Twice the best-in-class error at p = 1/2 exceeds eps/2.
    #[arg(long)]
    indicator: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Failures that map to the configuration exit code.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(e.into()))
}

fn parse_shatter(s: &str) -> anyhow::Result<ShatterFunction> {
    let (name, arg) = match s.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let num = || -> anyhow::Result<u64> {
        arg.ok_or_else(|| anyhow!("shatter `{name}` needs a parameter"))?
            .parse()
            .with_context(|| format!("bad shatter parameter in `{s}`"))
    };
    Ok(match name {
        "intervals" => ShatterFunction::Intervals,
        "k-intervals" => ShatterFunction::KIntervals { k: num()? },
        "sauer" => ShatterFunction::Sauer { vc_dim: num()? },
        "finite" => ShatterFunction::Finite { size: num()? },
        _ => bail!("unknown shatter function `{s}`"),
    })
}

fn load(common: &Common) -> anyhow::Result<ExperimentConfig> {
    let path = common.config.as_ref().ok_or_else(|| config_error(anyhow!("--config is required")))?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_error)?;
    let mut cfg = ExperimentConfig::from_json(&text)
        .with_context(|| path.display().to_string())
        .map_err(config_error)?;
    if let Some(s) = common.seed {
        cfg.master_seed = Some(s);
    }
    Ok(cfg)
}

fn set_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(k) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("configuring the worker pool")?;
    }
    Ok(())
}

/// Runs `cfg`, prints the summary and returns the exit code.
fn run_experiment(cfg: &ExperimentConfig, common: &Common) -> anyhow::Result<u8> {
    set_threads(common.threads)?;
    let dir = output_dir(cfg, common.out.as_deref());
    let summary = run(cfg, &dir, common.format.into()).map_err(config_error)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    for c in summary.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} {}", c.name, c.detail);
    }
    Ok(if summary.passed == Some(false) { PREDICATE_FAILED } else { 0 })
}

fn with_kind(common: &Common, kind: ExperimentKind) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = load(common)?;
    cfg.kind = kind;
    Ok(cfg)
}

fn preset(construction: Construction, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Counterexample, seed);
    match construction {
        Construction::Remark1 => {
            cfg.n_list = (2..=64).collect();
            cfg.counterexample = Some(CounterexampleSettings::Remark1 { p_list: vec![0.5] });
        }
        Construction::Remark2 => {
            cfg.runs = 50;
            cfg.counterexample = Some(CounterexampleSettings::Remark2 {
                atoms: 256,
                schedule: BlockRule::Power { base: 2 },
                horizon: 10_000,
                beyond: 1_000,
                threshold: 0.2,
                control_threshold: 0.05,
            });
        }
    }
    cfg
}

fn write_output(out: Option<&Path>, name: &str, body: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn generate_cmd(common: &Common, n: Option<usize>) -> anyhow::Result<u8> {
    let cfg = load(common)?;
    let seed = cfg.seed().map_err(config_error)?;
    let process = cfg.process.as_ref().ok_or_else(|| config_error(anyhow!("process is required")))?;
    let pair = cfg.pair.as_ref().ok_or_else(|| config_error(anyhow!("pair is required")))?;
    let n = n
        .or_else(|| cfg.n_list.first().copied())
        .ok_or_else(|| config_error(anyhow!("give --n or a nonempty n_list")))?;
    process.validate().map_err(config_error)?;
    pair.validate().map_err(config_error)?;
    let sample = generate(process, pair, n, seed);
    let dir = output_dir(&cfg, common.out.as_deref());
    let (name, body) = match common.format {
        Format::Csv => {
            let mut header: Vec<String> = (1..=sample.dim()).map(|i| format!("x{i}")).collect();
            header.push("y".into());
            let rows: Vec<Vec<String>> = sample
                .iter()
                .map(|(x, y)| x.iter().map(f64::to_string).chain([y.as_u8().to_string()]).collect())
                .collect();
            ("sample.csv", csv_string(&header, &rows))
        }
        Format::Json => {
            let rows: Vec<_> = sample.iter().map(|(x, y)| json!({"x": x, "y": y.as_u8()})).collect();
            ("sample.json", serde_json::to_string_pretty(&rows)? + "\n")
        }
    };
    write_output(Some(&dir), name, &body)?;
    Ok(0)
}

fn bounds_cmd(a: &BoundsArgs) -> anyhow::Result<u8> {
    let shatter = parse_shatter(&a.shatter).map_err(config_error)?;
    let occ = Occupancy::exact(a.c_n, 1.0 - a.c_n);
    let mut reports: Vec<BoundReport> = Vec::new();
    for &n in &a.n {
        for &eps in &a.eps {
            reports.extend(thm4_bounds(&shatter, n, a.delta, eps, &occ, a.realizable, a.indicator).map_err(config_error)?);
            reports.extend(vc_bounds(shatter.ln_eval(n), n, eps).map_err(config_error)?);
        }
    }
    let (name, body) = match a.format {
        Format::Csv => (
            "bounds.csv",
            csv_string(&BoundReport::csv_header(), &reports.iter().map(BoundReport::csv_row).collect::<Vec<_>>()),
        ),
        Format::Json => ("bounds.json", serde_json::to_string_pretty(&reports)? + "\n"),
    };
    write_output(a.out.as_deref(), name, &body)?;
    Ok(0)
}

fn validate_cmd(path: &Path) -> anyhow::Result<u8> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(config_error)?;
    let cfg = ExperimentConfig::from_json(&text).map_err(config_error)?;
    let diagnostics = cfg.validate();
    if diagnostics.is_empty() {
        println!("ok");
        Ok(0)
    } else {
        for d in &diagnostics {
            println!("{d}");
        }
        Ok(CONFIG_ERROR)
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Generate { common, n } => generate_cmd(&common, n),
        Command::Evaluate { common } => run_experiment(&with_kind(&common, ExperimentKind::Consistency)?, &common),
        Command::Tolerance { common } => run_experiment(&with_kind(&common, ExperimentKind::Tolerance)?, &common),
        Command::Bounds(a) => bounds_cmd(&a),
        Command::Counterexample { common, construction } => {
            let cfg = match construction {
                Some(c) => preset(c, common.seed.unwrap_or(0)),
                None => with_kind(&common, ExperimentKind::Counterexample)?,
            };
            run_experiment(&cfg, &common)
        }
        Command::Experiment { common } => run_experiment(&load(&common)?, &common),
        Command::Validate { config } => validate_cmd(&config),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(CONFIG_ERROR)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
