//! Command-line front end for the `gpl` library.
//!
//! Subcommands: `fit-em`, `fit-gibbs`, `summarize`, `predict`, `simulate`,
//! `loglik`, `bell`. Every run is a pure function of its input files, flags,
//! and seed: repeated invocations write byte-identical outputs. Exit codes:
//! 0 success, 1 usage problems, 2 data problems, 3 numerical degeneracy.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{ArgAction, Args, Parser, Subcommand};

use gpl::data::{parse_rankings_str, Direction};
use gpl::em::{em_fit_general, em_fit_paired, EmConfig, EmResult, EmVariant};
use gpl::gibbs::{run_chains, GibbsConfig, PairedStats, PosteriorSamples, PriorSpec, SamplerKind};
use gpl::io;
use gpl::model::{log_likelihood, pointwise_log_likelihoods};
use gpl::posterior::{aggregate_total_order, summarize, PosteriorSummary};
use gpl::predictive::{predictive_bucket_counts, predictive_win_probs};
use gpl::{ordered_bell, reverse_dataset, Dataset};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

struct CliError {
    code: u8,
    error: anyhow::Error,
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        error: anyhow!(msg.into()),
    }
}

fn data_err(error: anyhow::Error) -> CliError {
    CliError {
        code: EXIT_DATA,
        error,
    }
}

fn numerical(msg: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_NUMERICAL,
        error: anyhow!(msg.into()),
    }
}

#[derive(Parser)]
#[command(
    name = "gpl",
    version,
    about = "Fit, summarize, and simulate rank-ordered data with ties",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum a posteriori fit via EM (the MLE under uniform priors)
    FitEm(FitEmArgs),
    /// Posterior sampling via data-augmented Gibbs chains
    FitGibbs(FitGibbsArgs),
    /// Summaries and diagnostics for an existing samples file
    Summarize(SummarizeArgs),
    /// Tournament win probabilities from posterior samples
    Predict(PredictArgs),
    /// Posterior-predictive distribution of the number of tied groups
    Simulate(SimulateArgs),
    /// Exact log-likelihood of a dataset at fixed rates or per draw
    Loglik(LoglikArgs),
    /// Number of distinct bucket orders of k entities
    Bell(BellArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Rankings file
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model variant: gpl (small latents rank best) or reverse-gpl
    #[arg(long)]
    model: Option<String>,
    /// Beta prior first shape, shared by all entities
    #[arg(long)]
    prior_a: Option<f64>,
    /// Beta prior second shape, shared by all entities
    #[arg(long)]
    prior_b: Option<f64>,
    /// Per-entity prior overrides: lines of `label a b`
    #[arg(long)]
    prior_file: Option<PathBuf>,
    /// Random seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file (flags take precedence)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitEmArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Update variant: general, or paired (paired-comparison data only)
    #[arg(long)]
    sampler: Option<String>,
}

#[derive(Args)]
struct FitGibbsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of independent chains
    #[arg(long)]
    chains: Option<usize>,
    /// Retained draws per chain
    #[arg(long)]
    iters: Option<usize>,
    /// Leading draws discarded per chain
    #[arg(long)]
    burnin: Option<usize>,
    /// Sampler: general, or paired (paired-comparison data only)
    #[arg(long)]
    sampler: Option<String>,
    /// Warn when any PSRF exceeds this
    #[arg(long)]
    psrf_limit: Option<f64>,
    /// Exit with status 3 instead of warning on PSRF overruns
    #[arg(long, action = ArgAction::SetTrue)]
    fail_on_psrf: bool,
}

#[derive(Args)]
struct SummarizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Posterior samples CSV
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Posterior samples CSV
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Comma-separated entity labels competing in the event
    #[arg(long)]
    field: Option<String>,
    /// Number of simulated tournaments
    #[arg(long)]
    sims: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Posterior samples CSV
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Comma-separated entity labels competing in the event
    #[arg(long)]
    field: Option<String>,
    /// Number of simulated events
    #[arg(long)]
    sims: Option<u64>,
    /// Report the predictive probability of this bucket count
    #[arg(long)]
    observed_buckets: Option<u32>,
}

#[derive(Args)]
struct LoglikArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Rates file: lines of `label value`
    #[arg(long)]
    theta: Option<PathBuf>,
    /// Posterior samples CSV (writes the pointwise matrix)
    #[arg(long)]
    samples: Option<PathBuf>,
}

#[derive(Args)]
struct BellArgs {
    /// Number of entities
    k: usize,
}

const CONFIG_KEYS: &[&str] = &[
    "data",
    "model",
    "prior-a",
    "prior-b",
    "prior-file",
    "seed",
    "out",
    "chains",
    "iters",
    "burnin",
    "sampler",
    "samples",
    "field",
    "sims",
    "observed-buckets",
    "psrf-limit",
    "fail-on-psrf",
    "theta",
];

/// Values from a `--config` file, consulted when a flag is absent.
struct Settings {
    values: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut values = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))
                .map_err(data_err)?;
            for (key, value) in io::parse_config(&text).map_err(|e| {
                data_err(anyhow!(e).context(format!("in config file {}", path.display())))
            })? {
                if !CONFIG_KEYS.contains(&key.as_str()) {
                    return Err(usage(format!(
                        "unknown config key '{key}' in {}",
                        path.display()
                    )));
                }
                values.insert(key, value);
            }
        }
        Ok(Settings { values })
    }

    fn resolve<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| usage(format!("config key '{key}' has invalid value '{raw}'"))),
        }
    }

    fn resolve_flag(&self, set: bool, key: &str) -> CliResult<bool> {
        if set {
            return Ok(true);
        }
        match self.values.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(other) => Err(usage(format!(
                "config key '{key}' must be true or false, got '{other}'"
            ))),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {:#}", e.error);
        return ExitCode::from(e.code);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}

fn init_thread_pool() -> CliResult<()> {
    if let Ok(raw) = std::env::var("GPL_THREADS") {
        let n: usize = raw.parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            usage(format!(
                "GPL_THREADS must be a positive integer, got '{raw}'"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::FitEm(args) => cmd_fit_em(args),
        Command::FitGibbs(args) => cmd_fit_gibbs(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Loglik(args) => cmd_loglik(args),
        Command::Bell(args) => cmd_bell(args),
    }
}

// ---- shared resolution helpers ----

fn resolve_direction(settings: &Settings, flag: Option<String>) -> CliResult<Option<Direction>> {
    match settings.resolve(flag, "model")? {
        None => Ok(None),
        Some(raw) => Direction::parse(&raw).map(Some).map_err(|_| {
            usage(format!(
                "unknown model '{raw}' (expected gpl or reverse-gpl)"
            ))
        }),
    }
}

fn resolve_sampler(settings: &Settings, flag: Option<String>) -> CliResult<SamplerKind> {
    match settings.resolve(flag, "sampler")? {
        None => Ok(SamplerKind::General),
        Some(raw) => SamplerKind::parse(&raw).map_err(|_| {
            usage(format!(
                "unknown sampler '{raw}' (expected general or paired)"
            ))
        }),
    }
}

fn resolve_out_dir(settings: &Settings, flag: Option<PathBuf>) -> CliResult<PathBuf> {
    let out = settings
        .resolve(flag, "out")?
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))
        .map_err(data_err)?;
    Ok(out)
}

/// Loads the rankings file and applies the reverse transform when asked
/// for; returns the working dataset and the direction it represents.
fn load_dataset(settings: &Settings, common: &CommonArgs) -> CliResult<(Dataset, Direction)> {
    let path = settings
        .resolve(common.data.clone(), "data")?
        .ok_or_else(|| usage("--data is required"))?;
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading data file {}", path.display()))
        .map_err(data_err)?;
    let dataset = parse_rankings_str(&text)
        .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?;
    let direction =
        resolve_direction(settings, common.model.clone())?.unwrap_or(Direction::Standard);
    let working = match direction {
        Direction::Standard => dataset,
        Direction::Reverse => reverse_dataset(&dataset)
            .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?,
    };
    Ok((working, direction))
}

fn load_prior(settings: &Settings, common: &CommonArgs, d: &Dataset) -> CliResult<PriorSpec> {
    let a = settings.resolve(common.prior_a, "prior-a")?.unwrap_or(1.0);
    let b = settings.resolve(common.prior_b, "prior-b")?.unwrap_or(1.0);
    if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
        return Err(usage(format!(
            "prior shapes must be positive and finite, got ({a}, {b})"
        )));
    }
    match settings.resolve(common.prior_file.clone(), "prior-file")? {
        None => PriorSpec::constant(d.num_entities(), a, b).map_err(|e| data_err(anyhow!(e))),
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading prior file {}", path.display()))
                .map_err(data_err)?;
            let pairs = io::parse_prior_pairs(&text)
                .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?;
            io::align_prior(&pairs, &d.entities, a, b)
                .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))
        }
    }
}

fn load_samples(
    settings: &Settings,
    flag: Option<PathBuf>,
    model_flag: Option<String>,
) -> CliResult<(PosteriorSamples, Direction)> {
    let path = settings
        .resolve(flag, "samples")?
        .ok_or_else(|| usage("--samples is required"))?;
    let (samples, stored) = io::read_samples_csv_path(&path)
        .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?;
    let direction = resolve_direction(settings, model_flag)?.unwrap_or(stored);
    Ok((samples, direction))
}

fn resolve_field(
    settings: &Settings,
    flag: Option<String>,
    samples: &PosteriorSamples,
) -> CliResult<Vec<usize>> {
    let spec = settings
        .resolve(flag, "field")?
        .ok_or_else(|| usage("--field is required (comma-separated entity labels)"))?;
    let labels: Vec<&str> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if labels.is_empty() {
        return Err(usage("--field lists no entities"));
    }
    let mut field = Vec::with_capacity(labels.len());
    for label in labels {
        let id = samples
            .labels()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| data_err(anyhow!("entity '{label}' is not in the samples file")))?;
        if field.contains(&id) {
            return Err(usage(format!("entity '{label}' is repeated in --field")));
        }
        field.push(id);
    }
    Ok(field)
}

fn write_output(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(data_err)
}

fn print_total_order(summary: &PosteriorSummary, direction: Direction) -> CliResult<()> {
    let ids: Vec<usize> = (0..summary.labels.len()).collect();
    let order =
        aggregate_total_order(summary, &ids, direction).map_err(|e| data_err(anyhow!(e)))?;
    let labels: Vec<&str> = order.iter().map(|&k| summary.labels[k].as_str()).collect();
    println!("total order: {}", labels.join(" > "));
    Ok(())
}

// ---- subcommands ----

fn cmd_fit_em(args: FitEmArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let (dataset, _direction) = load_dataset(&settings, &args.common)?;
    let prior = load_prior(&settings, &args.common, &dataset)?;
    let out = resolve_out_dir(&settings, args.common.out.clone())?;
    if dataset.num_entities() == 0 {
        return Err(numerical("dataset has no entities; nothing to fit"));
    }
    let sampler = resolve_sampler(&settings, args.sampler)?;
    let cfg = EmConfig {
        variant: match sampler {
            SamplerKind::General => EmVariant::General,
            SamplerKind::PairedNegBin => EmVariant::Paired,
        },
        ..EmConfig::default()
    };
    let init = vec![0.5; dataset.num_entities()];
    let result: EmResult = match cfg.variant {
        EmVariant::General => em_fit_general(&dataset, &prior, &cfg, &init),
        EmVariant::Paired => {
            let ps = PairedStats::from_dataset(&dataset).map_err(|e| data_err(anyhow!(e)))?;
            em_fit_paired(&ps, &prior, &cfg, &init)
        }
    }
    .map_err(|e| data_err(anyhow!(e)))?;

    let report = io::format_em_report(&result, dataset.entities.labels());
    write_output(&out.join("em_report.txt"), &report)?;
    print!("{report}");
    if !result.converged {
        eprintln!(
            "warning: EM stopped after {} iterations without meeting the tolerance",
            result.iterations_used
        );
    }
    if !result.degenerate.is_empty() {
        let names: Vec<&str> = result
            .degenerate
            .iter()
            .map(|&k| dataset.entities.label(k))
            .collect();
        return Err(numerical(format!(
            "boundary mode for {}; rates clamped and written to em_report.txt",
            names.join(", ")
        )));
    }
    Ok(())
}

fn cmd_fit_gibbs(args: FitGibbsArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let (dataset, direction) = load_dataset(&settings, &args.common)?;
    let prior = load_prior(&settings, &args.common, &dataset)?;
    let out = resolve_out_dir(&settings, args.common.out.clone())?;
    if dataset.num_entities() == 0 {
        return Err(numerical("dataset has no entities; nothing to fit"));
    }
    let cfg = GibbsConfig {
        iterations: settings.resolve(args.iters, "iters")?.unwrap_or(10_000),
        burnin: settings.resolve(args.burnin, "burnin")?.unwrap_or(10),
        chains: settings.resolve(args.chains, "chains")?.unwrap_or(4),
        seed: settings.resolve(args.common.seed, "seed")?.unwrap_or(1),
        sampler: resolve_sampler(&settings, args.sampler)?,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let psrf_limit = settings
        .resolve(args.psrf_limit, "psrf-limit")?
        .unwrap_or(1.1);
    let fail_on_psrf = settings.resolve_flag(args.fail_on_psrf, "fail-on-psrf")?;

    let samples = run_chains(&dataset, &prior, &cfg).map_err(|e| data_err(anyhow!(e)))?;
    let samples_csv =
        io::write_samples_csv(&samples, direction).map_err(|e| data_err(anyhow!(e)))?;
    write_output(&out.join("samples.csv"), &samples_csv)?;

    let summary = summarize(&samples).map_err(|e| data_err(anyhow!(e)))?;
    write_output(
        &out.join("summary.csv"),
        &io::write_summary_csv(&summary).map_err(|e| data_err(anyhow!(e)))?,
    )?;
    print!("{}", io::format_summary_table(&summary));
    print_total_order(&summary, direction)?;

    let mut exceeded = Vec::new();
    for (k, psrf) in summary.psrf.iter().enumerate() {
        if let Some(r) = psrf {
            if *r > psrf_limit {
                exceeded.push(format!("{} ({r:.2})", summary.labels[k]));
            }
        }
    }
    if !exceeded.is_empty() {
        eprintln!(
            "warning: PSRF above {psrf_limit} for {}; chains may not have converged",
            exceeded.join(", ")
        );
        if fail_on_psrf {
            return Err(numerical("PSRF limit exceeded"));
        }
    }
    Ok(())
}

fn cmd_summarize(args: SummarizeArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let (samples, direction) = load_samples(&settings, args.samples, args.common.model.clone())?;
    let out = resolve_out_dir(&settings, args.common.out.clone())?;
    let summary = summarize(&samples).map_err(|e| data_err(anyhow!(e)))?;
    write_output(
        &out.join("summary.csv"),
        &io::write_summary_csv(&summary).map_err(|e| data_err(anyhow!(e)))?,
    )?;
    print!("{}", io::format_summary_table(&summary));
    print_total_order(&summary, direction)?;
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let (samples, direction) = load_samples(&settings, args.samples, args.common.model.clone())?;
    let field = resolve_field(&settings, args.field, &samples)?;
    let sims = settings.resolve(args.sims, "sims")?.unwrap_or(10_000);
    if sims == 0 {
        return Err(usage("--sims must be at least 1"));
    }
    let seed = settings.resolve(args.common.seed, "seed")?.unwrap_or(1);
    let out = resolve_out_dir(&settings, args.common.out.clone())?;

    let result = predictive_win_probs(&samples, &field, direction, sims, seed)
        .map_err(|e| data_err(anyhow!(e)))?;
    let labels: Vec<&str> = field
        .iter()
        .map(|&k| samples.labels()[k].as_str())
        .collect();
    let csv = io::write_win_probs_csv(&labels, &result, seed).map_err(|e| data_err(anyhow!(e)))?;
    write_output(&out.join("win_probs.csv"), &csv)?;
    let width = labels
        .iter()
        .map(|l| l.len())
        .max()
        .unwrap_or(6)
        .max("entity".len());
    println!("{:width$}  win_prob", "entity");
    for (label, p) in labels.iter().zip(&result.probs) {
        println!("{label:width$}  {p:.6}");
    }
    if result.uniform_fallbacks > 0 {
        eprintln!(
            "warning: {} of {} tournaments hit the play-off cap and were broken uniformly",
            result.uniform_fallbacks, result.n_sims
        );
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let (samples, direction) = load_samples(&settings, args.samples, args.common.model.clone())?;
    let field = resolve_field(&settings, args.field, &samples)?;
    let sims = settings.resolve(args.sims, "sims")?.unwrap_or(10_000);
    if sims == 0 {
        return Err(usage("--sims must be at least 1"));
    }
    let seed = settings.resolve(args.common.seed, "seed")?.unwrap_or(1);
    let observed = settings.resolve(args.observed_buckets, "observed-buckets")?;
    let out = resolve_out_dir(&settings, args.common.out.clone())?;

    let dist = predictive_bucket_counts(&samples, &field, direction, sims, seed)
        .map_err(|e| data_err(anyhow!(e)))?;
    write_output(
        &out.join("bucket_counts.csv"),
        &io::write_bucket_counts_csv(&dist, seed),
    )?;
    println!("buckets  count  frequency");
    for (&buckets, &count) in &dist.counts {
        println!(
            "{buckets:>7}  {count:>5}  {:.6}",
            count as f64 / dist.n_sims as f64
        );
    }
    if let Some(value) = observed {
        println!("P(buckets = {value}) = {:.6}", dist.probability(value));
    }
    Ok(())
}

fn cmd_loglik(args: LoglikArgs) -> CliResult<()> {
    let settings = Settings::load(args.common.config.as_deref())?;
    let (dataset, _direction) = load_dataset(&settings, &args.common)?;
    let theta_path = settings.resolve(args.theta, "theta")?;
    let samples_path = settings.resolve(args.samples, "samples")?;
    match (theta_path, samples_path) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading theta file {}", path.display()))
                .map_err(data_err)?;
            let pairs = io::parse_theta_pairs(&text)
                .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?;
            let theta = io::align_theta(&pairs, &dataset.entities)
                .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?;
            let total = log_likelihood(&dataset, &theta).map_err(|e| data_err(anyhow!(e)))?;
            println!("{total}");
            Ok(())
        }
        (None, Some(path)) => {
            let (samples, _) = io::read_samples_csv_path(&path)
                .map_err(|e| data_err(anyhow!(e).context(format!("in {}", path.display()))))?;
            // reorder each draw from the samples' column order to entity ids
            let mut column_of = Vec::with_capacity(dataset.num_entities());
            for id in 0..dataset.num_entities() {
                let label = dataset.entities.label(id);
                let col = samples
                    .labels()
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| {
                        data_err(anyhow!("entity '{label}' is missing from the samples file"))
                    })?;
                column_of.push(col);
            }
            let reordered: Vec<Vec<f64>> = (0..samples.total_draws())
                .map(|t| {
                    let draw = samples.draw(t);
                    column_of.iter().map(|&c| draw[c]).collect()
                })
                .collect();
            let matrix =
                pointwise_log_likelihoods(&dataset, reordered.iter().map(|v| v.as_slice()))
                    .map_err(|e| data_err(anyhow!(e)))?;
            let out = resolve_out_dir(&settings, args.common.out.clone())?;
            write_output(
                &out.join("pointwise.csv"),
                &io::write_pointwise_csv(&matrix),
            )?;
            println!(
                "wrote pointwise matrix: {} rankings x {} draws",
                matrix.len(),
                samples.total_draws()
            );
            Ok(())
        }
        (Some(_), Some(_)) => Err(usage("--theta and --samples are mutually exclusive")),
        (None, None) => Err(usage("loglik needs either --theta or --samples")),
    }
}

fn cmd_bell(args: BellArgs) -> CliResult<()> {
    let value = ordered_bell(args.k).map_err(|e| usage(e.to_string()))?;
    println!("{value}");
    Ok(())
}
