use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use kai_core::array::{generate_snapshots, TrialSeed};
use kai_core::estimators::{EstimatorKind, EstimatorSpec, Observation};
use kai_harness::appendix::{verify_appendix, AppendixConfig};
use kai_harness::complexity::{complexity_report, ComplexityConfig};
use kai_harness::config::{preset_text, ExperimentConfig, PRESET_NAMES};
use kai_harness::experiment::{run_experiment, write_complexity};
use kai_harness::HarnessError;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

/// Subspace DOA estimation: seeded Monte Carlo sweeps, complexity counts
/// and the covariance-correction checks.
#[derive(Debug, Parser)]
#[command(name = "kai-esprit", version)]
struct Cli {
    /// Worker threads for trial-level parallelism. Results do not depend on it.
    #[arg(long, global = true, env = "KAI_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the DOAs of one seeded dataset with one estimator.
    Estimate(EstimateArgs),
    /// Run the sweep and complexity sections of a configuration.
    Sweep(SweepArgs),
    /// Print multiplication counts of every model over a range of array sizes.
    Complexity(ComplexityArgs),
    /// Check the covariance-correction MSE inequality by Monte Carlo.
    VerifyAppendix(AppendixArgs),
    /// Print a shipped preset, or list them.
    Preset {
        name: Option<String>,
    },
}

#[derive(Debug, Args)]
struct Source {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self, default_preset: Option<&str>) -> anyhow::Result<ExperimentConfig> {
        match (&self.config, self.preset.as_deref().or(default_preset)) {
            (Some(path), _) => Ok(ExperimentConfig::from_path(path)?),
            (None, Some(name)) => Ok(ExperimentConfig::preset(name)?),
            (None, None) => Err(HarnessError::Config("pass --config <file> or --preset <name>".into()).into()),
        }
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    source: Source,
    /// Estimator name, or the label of a configured estimator.
    #[arg(long, default_value = "ms-kai-esprit")]
    estimator: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// Overrides the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    /// Sensor range `a:b`, inclusive.
    #[arg(long, default_value = "10:100")]
    m_range: String,
    #[arg(long, default_value_t = 25)]
    snapshots: u32,
    #[arg(long, default_value_t = 4)]
    sources: u32,
    #[arg(long, default_value_t = 20)]
    tau: u32,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Also write `complexity.csv` and `complexity.svg` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AppendixArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random projector/PSD pairs for the trace inequality.
    #[arg(long, default_value_t = 1000)]
    draws: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e
                .downcast_ref::<HarnessError>()
                .map_or(true, HarnessError::is_config_error);
            ExitCode::from(if config { EXIT_CONFIG } else { EXIT_NUMERICAL })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Estimate(args) => estimate(args),
        Command::Sweep(args) => sweep(args, cli.threads),
        Command::Complexity(args) => complexity(args),
        Command::VerifyAppendix(args) => appendix(args),
        Command::Preset { name } => {
            match name {
                Some(name) => print!("{}", preset_text(&name)?),
                None => PRESET_NAMES.iter().for_each(|n| println!("{n}")),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn estimate(args: EstimateArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.source.load(Some("fig2_uncorrelated"))?;
    let geom = cfg.geometry()?;
    let scenario = cfg.scenario(args.snr)?;
    let spec = match cfg.estimators.iter().find(|e| e.label() == args.estimator) {
        Some(e) => e.spec()?,
        None => {
            let kind: EstimatorKind = args.estimator.parse().map_err(HarnessError::from)?;
            EstimatorSpec::default_for(kind)
        }
    };
    let seed = args
        .seed
        .or(cfg.sweep.as_ref().map(|s| s.base_seed))
        .unwrap_or(1);
    let set = generate_snapshots(&geom, &scenario, TrialSeed::new(seed, args.trial)).map_err(HarnessError::from)?;
    let obs = Observation::from_snapshots(&set);
    let est = spec
        .estimate(&obs, scenario.source_count(), &geom)
        .map_err(HarnessError::from)?;
    println!("estimator: {}", est.estimator.name());
    println!("true:      {}", join(scenario.doas()));
    println!("estimated: {}", join(&est.angles));
    if let Some(diag) = &est.diagnostics {
        for it in &diag.iterations {
            println!(
                "step {}: mu_opt = {:.2}, angles = {}",
                it.iteration,
                it.mu_opt,
                join(&it.angles)
            );
        }
    }
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    Ok(ExitCode::SUCCESS)
}

fn join(angles: &[f64]) -> String {
    angles
        .iter()
        .map(|a| format!("{a:.4}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn sweep(args: SweepArgs, threads: Option<usize>) -> anyhow::Result<ExitCode> {
    let mut cfg = args.source.load(None)?;
    if let Some(sweep) = cfg.sweep.as_mut() {
        if let Some(seed) = args.seed {
            sweep.base_seed = seed;
        }
        if let Some(trials) = args.trials {
            sweep.trials = trials;
        }
    }
    let outputs = run_experiment(&cfg, threads, &args.out)?;
    if let Some(report) = &outputs.complexity {
        print!("{}", report.table());
    }
    if let Some(result) = &outputs.sweep {
        println!("{:<16} {:>7} {:>10} {:>10} {:>9}", "estimator", "snr_db", "rmse_db", "p_resolve", "excluded");
        for c in &result.cells {
            println!(
                "{:<16} {:>7} {:>10.3} {:>10.3} {:>9}",
                c.estimator,
                c.snr_db,
                c.rmse_db(),
                c.prob_resolution,
                c.excluded_trials
            );
        }
    }
    for f in &outputs.files {
        println!("wrote {}", args.out.join(f).display());
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_range(text: &str) -> anyhow::Result<(u32, u32)> {
    let (a, b) = text
        .split_once(':')
        .with_context(|| format!("expected a:b, got {text:?}"))?;
    Ok((a.trim().parse()?, b.trim().parse()?))
}

fn complexity(args: ComplexityArgs) -> anyhow::Result<ExitCode> {
    let (m_min, m_max) = parse_range(&args.m_range).map_err(|e| HarnessError::Config(format!("--m-range: {e}")))?;
    let cfg = ComplexityConfig {
        m_min,
        m_max,
        snapshots: args.snapshots,
        sources: args.sources,
        tau: args.tau,
        delta: args.delta,
    };
    let report = complexity_report(&cfg)?;
    print!("{}", report.table());
    if let Some(dir) = &args.out {
        for path in write_complexity(&report, dir, "complexity")? {
            println!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn appendix(args: AppendixArgs) -> anyhow::Result<ExitCode> {
    if args.trials < 2 {
        bail!(HarnessError::Config("--trials must be at least 2".into()));
    }
    let report = verify_appendix(&AppendixConfig {
        trials: args.trials,
        base_seed: args.seed,
        trace_draws: args.draws,
        ..AppendixConfig::default()
    })?;
    print!("{}", report.table());
    Ok(if report.violation() {
        ExitCode::from(EXIT_VIOLATION)
    } else {
        ExitCode::SUCCESS
    })
}
