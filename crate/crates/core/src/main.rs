//! Command-line harness for the benchmark experiments.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use barker_mcmc::experiments::{run_experiment, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "barker-mcmc",
    version,
    about = "Gradient-based MCMC benchmarks around the Barker proposal",
    long_about = "Config-driven MCMC experiments: step-size robustness sweeps, \
dimension scaling, adaptive tuning on heterogeneous targets, the Poisson \
random-effects benchmark, spectral-gap decay, total-variation decay, and \
acceptance-order fits.\n\nEvery run writes <output_dir>/<experiment>.csv plus \
manifest.json (resolved config, seed, version, wall time, warnings). CSV \
bytes are reproducible for a fixed config regardless of thread count."
)]
struct Cli {
    /// JSON config file; omitted fields fall back to desk-scale defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replicate-count override.
    #[arg(long, global = true)]
    replicates: Option<u32>,
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory override.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// ESJD of each sampler across a step-size grid on a fixed target.
    #[command(long_about = "ESJD of each sampler across a step-size grid.\n\
CSV columns: sampler,sigma,replicate,esjd,mean_accept")]
    SweepStepsize,
    /// ESJD per coordinate against dimension with per-family optimized
    /// step size, on iid Gaussian and hyperbolic targets.
    #[command(long_about = "Dimension scaling with optimized step sizes.\n\
CSV columns: target,sampler,dim,sigma_opt,esjd_per_coord,mean_accept")]
    Scaling,
    /// Adaptive tuning on the four heterogeneous 100-dimensional targets:
    /// adaptation times and first-moment MSE.
    #[command(long_about = "Adaptive-tuning comparison on scenarios 1-4.\n\
CSV columns: scenario,sampler,n_steps,replicates,tau_adapt,tau_censored,\
mse_mid,mse_final,divergences\n\
Companion adaptive_scenarios_dt.csv: scenario,sampler,t,d_t,log_sigma_rep0 \
(replicate-averaged tuning distance and the first replicate's global-scale \
path, thinned x10)")]
    Adaptive,
    /// Poisson random-effects posterior: effective sample sizes and
    /// gradient cost for adaptively tuned chains.
    #[command(long_about = "Poisson random-effects benchmark.\n\
CSV columns: scenario,sampler,iterations,leapfrog_steps,grad_calls,min_ess,\
median_ess,min_ess_per_100g_mean,min_ess_per_100g_sd,divergences\n\
(leapfrog_steps and the per-gradient columns are empty where not \
applicable). Datasets are written as poisson_data_s<k>.json.")]
    Poisson,
    /// Exact spectral gaps of grid-discretized 1-d samplers as the target
    /// compresses.
    #[command(name = "gap-lab", long_about = "Spectral-gap decay sweep.\n\
CSV columns: family,lambda,n,l,gap,conductance_right_half,gap_refined,stable")]
    GapLab,
    /// Total-variation distance of gradient-based proposals from the random
    /// walk as the target stretches.
    #[command(name = "tv-decay", long_about = "TV decay sweep.\n\
CSV columns: family,lambda,grad_at_x,tv")]
    TvDecay,
    /// Decay order of log-acceptance in the step size (1 for the random
    /// walk, 3 for Barker and Langevin).
    #[command(name = "acceptance-order", long_about = "Acceptance-order fits.\n\
CSV columns: sampler,pair,x,u,slope")]
    AcceptanceOrder,
    /// Parse and validate a config file without running anything.
    ValidateConfig,
}

impl Command {
    fn kind(&self) -> Option<ExperimentKind> {
        match self {
            Command::SweepStepsize => Some(ExperimentKind::SweepStepsize),
            Command::Scaling => Some(ExperimentKind::Scaling),
            Command::Adaptive => Some(ExperimentKind::AdaptiveScenarios),
            Command::Poisson => Some(ExperimentKind::Poisson),
            Command::GapLab => Some(ExperimentKind::GapLab),
            Command::TvDecay => Some(ExperimentKind::TvDecay),
            Command::AcceptanceOrder => Some(ExperimentKind::AcceptanceOrder),
            Command::ValidateConfig => None,
        }
    }
}

fn load_config(cli: &Cli, kind: Option<ExperimentKind>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json(&text)?
        }
        None => {
            let kind = kind.context("validate-config requires --config")?;
            ExperimentConfig::default_for(kind)
        }
    };
    if let Some(kind) = kind {
        anyhow::ensure!(
            cfg.experiment == kind,
            "config is for experiment '{}', but the '{}' subcommand was invoked",
            cfg.experiment.name(),
            kind.name()
        );
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(replicates) = cli.replicates {
        cfg.replicates = Some(replicates);
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir.clone_from(dir);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring worker threads")?;
    }
    if let Command::ValidateConfig = cli.command {
        let cfg = load_config(&cli, None)?;
        println!("OK: valid {} config", cfg.experiment.name());
        return Ok(());
    }
    let kind = cli.command.kind().expect("experiment subcommand");
    let cfg = load_config(&cli, Some(kind))?;
    let summary = run_experiment(&cfg)?;
    println!(
        "{}: wrote {} and {}",
        cfg.experiment.name(),
        summary.csv_path.display(),
        summary.manifest_path.display()
    );
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
