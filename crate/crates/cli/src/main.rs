//! `fracmix`: simulate mixed Gaussian fractional processes and estimate the
//! demixing matrix and memory parameters with the two-step wavelet method.
//!
//! Subcommands: `synth`, `estimate`, `mc`, `analyze`, `whittle-compare`.
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;

use fracmix::analysis::{analyze, AnalyzeConfig};
use fracmix::error::Error;
use fracmix::estimator::{self, DemixConfig};
use fracmix::mc::{mc_run, ExperimentConfig};
use fracmix::rng::StreamSeed;
use fracmix::series::MultiSeries;
use fracmix::synth::{self, MixingSpec, ProcessClass};


const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "fracmix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master RNG seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo runs; 0 = automatic.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output path (report JSON or series CSV, depending on the subcommand).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a mixed fractional process and write it as CSV.
    Synth(SynthArgs),
    /// Run the two-step estimator on a CSV series.
    Estimate(EstimateArgs),
    /// Monte Carlo experiment from a JSON config.
    Mc(McArgs),
    /// Data-analysis pipeline: ACF/CCF, scaling, coherence, demixing.
    Analyze(AnalyzeArgs),
    /// Accuracy/timing comparison of the two-step method vs Whittle ML.
    WhittleCompare(WhittleCompareArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// JSON config with {"nu", "channels": [{"type": ...}], "mixing": [[..]]}.
    #[arg(long)]
    config: PathBuf,
    /// Override the path length from the config.
    #[arg(long)]
    nu: Option<usize>,
    /// Also write the hidden (unmixed) process next to the output.
    #[arg(long)]
    hidden_out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Input CSV series.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    j1: usize,
    #[arg(long, default_value_t = 6)]
    j2: usize,
    #[arg(long, default_value_t = 2)]
    n_psi: usize,
    /// Memory-regression octaves as lo:hi, e.g. 2:7; default uses all octaves
    /// with at least 8 coefficients.
    #[arg(long)]
    octaves: Option<String>,
    /// Confidence level for the approximate half-widths.
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
    /// Per-channel process classes for the d -> h mapping, e.g. fbm,fgn.
    #[arg(long)]
    classes: Option<String>,
    /// Write the demixed series to this CSV path.
    #[arg(long)]
    demixed_out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// JSON experiment config (see ExperimentConfig).
    #[arg(long)]
    config: PathBuf,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Per-replication CSV output path.
    #[arg(long)]
    replications_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input CSV series (2+ channels).
    #[arg(long)]
    input: PathBuf,
    /// Optional JSON config (AnalyzeConfig); defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for plot-ready CSV tables.
    #[arg(long)]
    plots_dir: Option<PathBuf>,
}

#[derive(Args)]
struct WhittleCompareArgs {
    /// JSON experiment config; must define 2 channels.
    #[arg(long)]
    config: PathBuf,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<usize>,
}

/// Top-level report envelope shared by all subcommands.
#[derive(Serialize)]
struct Report<C: Serialize, R: Serialize> {
    config: C,
    results: R,
    timing: Timing,
    version: String,
}

#[derive(Serialize)]
struct Timing {
    wall_time_s: f64,
}

fn write_report<C: Serialize, R: Serialize>(
    out: Option<&Path>,
    config: C,
    results: R,
    started: Instant,
) -> fracmix::Result<()> {
    let report = Report {
        config,
        results,
        timing: Timing { wall_time_s: started.elapsed().as_secs_f64() },
        version: VERSION.to_string(),
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::numerical(format!("serialize report: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, json.as_bytes())?,
        None => println!("{json}"),
    }
    Ok(())
}

#[derive(serde::Deserialize, Serialize, Clone)]
struct SynthConfig {
    nu: usize,
    channels: Vec<ProcessClass>,
    mixing: Vec<Vec<f64>>,
    #[serde(default)]
    seed: u64,
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> fracmix::Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: format!("{path:?}: {e}"),
    })
}

fn run_synth(args: &SynthArgs, cli: &Cli) -> fracmix::Result<()> {
    let mut cfg: SynthConfig = load_json(&args.config)?;
    if let Some(nu) = args.nu {
        cfg.nu = nu;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let n = cfg.channels.len();
    if cfg.mixing.len() != n || cfg.mixing.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("mixing matrix shape must match channel count".into()));
    }
    let flat: Vec<f64> = cfg.mixing.iter().flatten().copied().collect();
    let spec = MixingSpec::new(DMatrix::from_row_slice(n, n, &flat), cfg.channels.clone())?;
    let (x, y) = synth::synth_mixed(&spec, cfg.nu, StreamSeed::new(cfg.seed))?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("series.csv"));
    y.save_csv(&out)?;
    if let Some(hidden) = &args.hidden_out {
        x.save_csv(hidden)?;
    }
    eprintln!("wrote {} samples x {} channels to {}", y.len(), y.channels(), out.display());
    Ok(())
}

fn parse_octaves(spec: &str) -> fracmix::Result<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::domain("octave range must look like lo:hi"));
    }
    let lo: usize = parts[0].parse().map_err(|_| Error::domain("bad octave range"))?;
    let hi: usize = parts[1].parse().map_err(|_| Error::domain("bad octave range"))?;
    if lo < 1 || hi < lo {
        return Err(Error::domain("octave range must satisfy 1 <= lo <= hi"));
    }
    Ok((lo..=hi).collect())
}

fn parse_classes(spec: &str, n: usize) -> fracmix::Result<Vec<ProcessClass>> {
    let names: Vec<&str> = spec.split(',').collect();
    if names.len() != n {
        return Err(Error::domain(format!("expected {n} classes, got {}", names.len())));
    }
    names
        .iter()
        .map(|name| match name.trim().to_ascii_lowercase().as_str() {
            "fgn" => Ok(ProcessClass::Fgn { h: 0.5 }),
            "fbm" => Ok(ProcessClass::Fbm { h: 0.5 }),
            "farima" => Ok(ProcessClass::Farima { d: 0.0 }),
            "fou" => Ok(ProcessClass::Fou { lambda: 1.0, h: 0.5 }),
            other => Err(Error::domain(format!("unknown process class {other:?}"))),
        })
        .collect()
}

fn run_estimate(args: &EstimateArgs, cli: &Cli) -> fracmix::Result<()> {
    let started = Instant::now();
    let y = MultiSeries::load_csv(&args.input)?;
    let cfg = DemixConfig { j1: args.j1, j2: args.j2, n_psi: args.n_psi }.feasible_for(y.len())?;
    let octaves = match &args.octaves {
        Some(s) => parse_octaves(s)?,
        None => Vec::new(),
    };
    let classes = match &args.classes {
        Some(s) => Some(parse_classes(s, y.channels())?),
        None => None,
    };
    let result = estimator::two_step(&y, &cfg, &octaves, classes.as_deref(), Some(args.ci_level))?;
    if let Some(path) = &args.demixed_out {
        result.demixed.save_csv(path)?;
    }
    write_report(cli.out.as_deref(), cfg, result.report(), started)
}

fn run_mc(args: &McArgs, cli: &Cli) -> fracmix::Result<()> {
    let started = Instant::now();
    let mut cfg: ExperimentConfig = load_json(&args.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads > 0 {
        cfg.threads = cli.threads;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    let report = mc_run(&cfg)?;
    if let Some(path) = &args.replications_out {
        let file = std::fs::File::create(path)?;
        report.write_replications_csv(file)?;
    }
    write_report(cli.out.as_deref(), cfg, report, started)
}

fn run_analyze(args: &AnalyzeArgs, cli: &Cli) -> fracmix::Result<()> {
    let started = Instant::now();
    let y = MultiSeries::load_csv(&args.input)?;
    let cfg: AnalyzeConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => AnalyzeConfig::default(),
    };
    let report = analyze(&y, &cfg)?;
    if let Some(dir) = &args.plots_dir {
        std::fs::create_dir_all(dir)?;
        write_scaling_csv(&dir.join("scaling_pre_demix.csv"), &report.pre_demix, y.labels())?;
        write_scaling_csv(&dir.join("scaling_post_demix.csv"), &report.post_demix, y.labels())?;
        write_coherence_csv(&dir.join("coherence_pre_demix.csv"), &report.pre_demix)?;
        write_coherence_csv(&dir.join("coherence_post_demix.csv"), &report.post_demix)?;
    }
    write_report(cli.out.as_deref(), cfg, report, started)
}

/// Plot-ready long table (j, log2_wii, channel).
fn write_scaling_csv(
    path: &Path,
    table: &fracmix::analysis::ScalingTable,
    labels: &[String],
) -> fracmix::Result<()> {
    let mut text = String::from("j,log2_wii,channel\n");
    for (ch, row) in table.log2_wii.iter().enumerate() {
        for (idx, &j) in table.octaves.iter().enumerate() {
            text.push_str(&format!("{j},{},{}\n", row[idx], labels[ch]));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

/// Plot-ready table (j, coherence) per channel pair.
fn write_coherence_csv(path: &Path, table: &fracmix::analysis::ScalingTable) -> fracmix::Result<()> {
    let mut text = String::from("j,coherence,pair\n");
    for (pair_idx, &(i, j2)) in table.pairs.iter().enumerate() {
        for (idx, &j) in table.octaves.iter().enumerate() {
            text.push_str(&format!("{j},{},{}-{}\n", table.coherence[pair_idx][idx], i + 1, j2 + 1));
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct CompareResults {
    parameters: Vec<fracmix::mc::ParamStats>,
    ml_parameters: Vec<fracmix::mc::ParamStats>,
    two_step_mean_s: f64,
    whittle_mean_s: f64,
    time_ratio: f64,
}

fn run_whittle_compare(args: &WhittleCompareArgs, cli: &Cli) -> fracmix::Result<()> {
    let started = Instant::now();
    let mut cfg: ExperimentConfig = load_json(&args.config)?;
    cfg.whittle = true;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.threads > 0 {
        cfg.threads = cli.threads;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    let report = mc_run(&cfg)?;
    let whittle_mean = report.timing.whittle_mean_s.unwrap_or(f64::NAN);
    let results = CompareResults {
        parameters: report.parameters.clone(),
        ml_parameters: report.ml_parameters.clone(),
        two_step_mean_s: report.timing.two_step_mean_s,
        whittle_mean_s: whittle_mean,
        time_ratio: whittle_mean / report.timing.two_step_mean_s,
    };
    write_report(cli.out.as_deref(), cfg, results, started)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Synth(args) => run_synth(args, &cli),
        Command::Estimate(args) => run_estimate(args, &cli),
        Command::Mc(args) => run_mc(args, &cli),
        Command::Analyze(args) => run_analyze(args, &cli),
        Command::WhittleCompare(args) => run_whittle_compare(args, &cli),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

