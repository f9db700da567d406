//! Config-driven experiment harness behind the `barker-mcmc` CLI.
//!
//! Each experiment writes `<output_dir>/<experiment>.csv` with the column
//! schema documented in the CLI help, plus `manifest.json` carrying the
//! resolved config, seed, versions, wall time, and any warnings. CSV bytes
//! are identical across re-runs and thread counts: every chain owns an RNG
//! stream derived from the master seed, and results are reduced in task
//! order.

pub mod adaptive;
pub mod config;
pub mod gap_sweep;
pub mod order;
pub mod poisson;
pub mod scaling;
pub mod scenarios;
pub mod sweep;
pub mod tv_decay;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;

use crate::proposals::ProposalKernel;

pub use config::{ExperimentConfig, ExperimentKind, SamplerName, TargetSpec};

/// Build a kernel for a named sampler at scale `sigma`.
pub fn kernel_for(
    sampler: SamplerName,
    sigma: f64,
    hmc_leapfrog_steps: usize,
    malta_delta: Option<f64>,
) -> ProposalKernel<f64> {
    match sampler {
        SamplerName::Rwm => ProposalKernel::rwm(sigma),
        SamplerName::Mala => ProposalKernel::mala(sigma),
        SamplerName::Barker => ProposalKernel::barker(sigma),
        SamplerName::BarkerGlobalFlip => ProposalKernel::barker_global_flip(sigma),
        SamplerName::Malta => ProposalKernel::malta(sigma, malta_delta),
        SamplerName::Maltac => ProposalKernel::maltac(sigma),
        SamplerName::Hmc => ProposalKernel::hmc(sigma, hmc_leapfrog_steps),
    }
    .expect("valid kernel parameters")
}

/// Where an experiment run put its files.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub warnings: Vec<String>,
}

/// Run the experiment described by `cfg`, writing its CSV and manifest.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let csv_path = cfg.output_dir.join(format!("{}.csv", cfg.experiment.name()));
    let started = Instant::now();
    let mut warnings = Vec::new();
    let mut extra = serde_json::Map::new();

    match cfg.experiment {
        ExperimentKind::SweepStepsize => {
            let target = cfg
                .target
                .clone()
                .unwrap_or(TargetSpec::StdGaussian { dim: 1 })
                .build(cfg.seed)?;
            let result = sweep::run_sweep(
                &target,
                &cfg.samplers,
                &sorted(&cfg.sigma_grid),
                cfg.n_steps_or(100_000),
                cfg.replicates_or(1),
                cfg.seed,
                cfg.hmc_leapfrog_steps.unwrap_or(10),
                cfg.malta_delta,
            );
            let mut w = csv_writer(&csv_path)?;
            writeln!(w, "sampler,sigma,replicate,esjd,mean_accept")?;
            for r in &result.rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    r.sampler.name(),
                    r.sigma,
                    r.replicate,
                    r.esjd,
                    r.mean_accept
                )?;
            }
        }
        ExperimentKind::Scaling => {
            let result = scaling::run_scaling(
                &[
                    scaling::ScalingTargetKind::Gaussian,
                    scaling::ScalingTargetKind::Hyperbolic,
                ],
                &cfg.samplers,
                &cfg.dim_grid,
                cfg.n_steps_or(20_000),
                cfg.replicates_or(3),
                cfg.seed,
            );
            let mut w = csv_writer(&csv_path)?;
            writeln!(w, "target,sampler,dim,sigma_opt,esjd_per_coord,mean_accept")?;
            for r in &result.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    r.target.name(),
                    r.sampler.name(),
                    r.dim,
                    r.sigma_opt,
                    r.esjd_per_coord,
                    r.mean_accept
                )?;
            }
        }
        ExperimentKind::AdaptiveScenarios => {
            let result = adaptive::run_adaptive_scenarios(
                &cfg.scenarios,
                &cfg.samplers,
                100,
                cfg.n_steps_or(20_000),
                cfg.replicates_or(10),
                cfg.kappa_or(0.6),
                cfg.tau_epsilon.unwrap_or(1.0),
                cfg.seed,
            );
            let mut w = csv_writer(&csv_path)?;
            writeln!(
                w,
                "scenario,sampler,n_steps,replicates,tau_adapt,tau_censored,mse_mid,mse_final,divergences"
            )?;
            for c in &result.combos {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    c.scenario,
                    c.sampler.name(),
                    result.n_steps,
                    result.replicates,
                    c.tau.as_steps(),
                    u8::from(c.tau.is_censored()),
                    c.mse_mid,
                    c.mse_final,
                    c.divergences
                )?;
            }
            // Companion file: replicate-averaged tuning distance paths,
            // thinned for plotting.
            let dt_path = cfg.output_dir.join("adaptive_scenarios_dt.csv");
            let mut w = csv_writer(&dt_path)?;
            writeln!(w, "scenario,sampler,t,d_t,log_sigma_rep0")?;
            for c in &result.combos {
                for (i, d) in c.d_mean.iter().enumerate() {
                    if (i + 1) % 10 == 0 || i == 0 {
                        writeln!(
                            w,
                            "{},{},{},{},{}",
                            c.scenario,
                            c.sampler.name(),
                            i + 1,
                            d,
                            c.trace_log_sigma[i]
                        )?;
                    }
                }
            }
            extra.insert("dt_csv".into(), "adaptive_scenarios_dt.csv".into());
        }
        ExperimentKind::Poisson => {
            let result = poisson::run_poisson(
                &cfg.scenarios,
                &cfg.samplers,
                50,
                5,
                cfg.n_steps_or(20_000),
                cfg.replicates_or(5),
                cfg.kappa_or(0.6),
                cfg.hmc_leapfrog_steps.unwrap_or(10),
                cfg.seed,
            );
            warnings.extend(result.warnings.iter().cloned());
            let mut w = csv_writer(&csv_path)?;
            writeln!(
                w,
                "scenario,sampler,iterations,leapfrog_steps,grad_calls,min_ess,median_ess,min_ess_per_100g_mean,min_ess_per_100g_sd,divergences"
            )?;
            for r in &result.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    r.scenario,
                    r.sampler.name(),
                    r.iterations,
                    r.leapfrog_steps.map(|l| l.to_string()).unwrap_or_default(),
                    r.grad_calls,
                    r.min_ess,
                    r.median_ess,
                    r.min_ess_per_100g_mean
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                    r.min_ess_per_100g_sd
                        .map(|v| v.to_string())
                        .unwrap_or_default(),
                    r.divergences
                )?;
            }
            for (scenario, data) in &result.datasets {
                let path = cfg.output_dir.join(format!("poisson_data_s{scenario}.json"));
                std::fs::write(&path, data.to_json())?;
            }
        }
        ExperimentKind::GapLab => {
            let result = gap_sweep::run_gap_sweep(&cfg.samplers, &cfg.lambda_grid);
            let mut w = csv_writer(&csv_path)?;
            writeln!(
                w,
                "family,lambda,n,l,gap,conductance_right_half,gap_refined,stable"
            )?;
            for r in &result.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    r.family.name(),
                    r.lambda,
                    r.n,
                    r.l,
                    r.gap,
                    r.conductance_right,
                    r.gap_refined,
                    u8::from(r.stable)
                )?;
            }
        }
        ExperimentKind::TvDecay => {
            let result = tv_decay::run_tv_decay(&cfg.samplers, &cfg.lambda_grid, 1.0);
            let mut w = csv_writer(&csv_path)?;
            writeln!(w, "family,lambda,grad_at_x,tv")?;
            for r in &result.rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    r.family.name(),
                    r.lambda,
                    r.grad_at_x,
                    r.tv
                )?;
            }
            for &family in &cfg.samplers {
                extra.insert(
                    format!("tv_slope_{}", family.name()),
                    serde_json::json!(result.slope(family)),
                );
            }
        }
        ExperimentKind::AcceptanceOrder => {
            let result = order::run_acceptance_order(
                &cfg.samplers,
                &sorted(&cfg.sigma_grid),
                cfg.replicates_or(5),
                cfg.seed,
            );
            let mut w = csv_writer(&csv_path)?;
            writeln!(w, "sampler,pair,x,u,slope")?;
            for r in &result.rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    r.sampler.name(),
                    r.pair,
                    r.x,
                    r.u,
                    r.slope
                )?;
            }
        }
    }

    let manifest_path = cfg.output_dir.join("manifest.json");
    write_manifest(
        cfg,
        &manifest_path,
        started.elapsed().as_secs_f64(),
        &warnings,
        serde_json::Value::Object(extra),
    )?;
    Ok(RunSummary {
        experiment: cfg.experiment,
        csv_path,
        manifest_path,
        warnings,
    })
}

fn sorted(grid: &[f64]) -> Vec<f64> {
    let mut g = grid.to_vec();
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g
}

fn csv_writer(path: &Path) -> anyhow::Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_manifest(
    cfg: &ExperimentConfig,
    path: &Path,
    wall_time_secs: f64,
    warnings: &[String],
    extra: serde_json::Value,
) -> anyhow::Result<()> {
    let manifest = serde_json::json!({
        "config": cfg,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "wall_time_secs": wall_time_secs,
        "finished_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "warnings": warnings,
        "notes": "desk-scale run; paper-scale settings are larger (see README)",
        "extra": extra,
    });
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
