//! Poisson random-effects benchmark: adaptive chains on the hierarchical
//! posterior, reporting effective sample sizes against gradient cost.

use rayon::prelude::*;

use crate::adaptation::{default_initialization, AdaptationSettings, AdaptationState};
use crate::diagnostics::ess;
use crate::sampler::{replicate_rng, run_chain_adaptive_with_rng};
use crate::scalar::Scalar;
use crate::targets::{generate_poisson_data, PoissonDataset, TargetModel};

use super::config::SamplerName;
use super::kernel_for;
use super::scenarios::{poisson_data_seed, poisson_scenario_params};

#[derive(Clone, Debug)]
pub struct PoissonRow {
    pub scenario: u32,
    pub sampler: SamplerName,
    pub iterations: usize,
    pub leapfrog_steps: Option<usize>,
    /// Mean over replicates of the total gradient evaluations.
    pub grad_calls: f64,
    /// Mean over replicates of the minimum ESS across parameters.
    pub min_ess: f64,
    pub median_ess: f64,
    /// Mean and standard deviation across replicates of
    /// `min ESS / gradient calls * 100` (absent for the random walk).
    pub min_ess_per_100g_mean: Option<f64>,
    pub min_ess_per_100g_sd: Option<f64>,
    pub divergences: u64,
}

#[derive(Clone, Debug)]
pub struct PoissonResult {
    pub rows: Vec<PoissonRow>,
    pub datasets: Vec<(u32, PoissonDataset)>,
    pub warnings: Vec<String>,
}

impl PoissonResult {
    pub fn row(&self, scenario: u32, sampler: SamplerName) -> &PoissonRow {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.sampler == sampler)
            .expect("row present")
    }
}

struct ReplicateEss {
    min_ess: f64,
    median_ess: f64,
    grad_calls: u64,
    divergences: u64,
}

#[allow(clippy::too_many_arguments)]
fn run_replicate(
    target: &TargetModel<f64>,
    data: &PoissonDataset,
    sampler: SamplerName,
    n_steps: usize,
    kappa: f64,
    hmc_leapfrog_steps: usize,
    seed: u64,
    stream: u64,
) -> ReplicateEss {
    let dim = target.dim();
    let mut rng = replicate_rng(seed, stream);
    // Initialize from the model's prior: mu, then the group effects.
    let mu0 = data.prior_sd_mu * f64::std_normal(&mut rng);
    let mut init = vec![mu0; dim];
    for eta in init.iter_mut().skip(1) {
        *eta = mu0 + data.sigma_eta * f64::std_normal(&mut rng);
    }
    let family = sampler.family();
    let (sigma0, alpha_star) = default_initialization(family, dim);
    let adapt = AdaptationState::new(
        sigma0,
        dim,
        AdaptationSettings::diagonal(kappa, alpha_star),
    );
    let base_kernel = kernel_for(sampler, sigma0, hmc_leapfrog_steps, None);
    let (trace, _) = run_chain_adaptive_with_rng(
        init,
        &base_kernel,
        target,
        n_steps,
        &mut rng,
        adapt,
        (seed, stream),
    );
    // ESS on the second half of the run, per parameter.
    let burn = n_steps / 2;
    let mut all = Vec::with_capacity(dim);
    for i in 0..dim {
        let series: Vec<f64> = (burn..n_steps).map(|t| trace.sample_row(t)[i]).collect();
        all.push(ess(&series));
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if dim % 2 == 1 {
        all[dim / 2]
    } else {
        0.5 * (all[dim / 2 - 1] + all[dim / 2])
    };
    ReplicateEss {
        min_ess: all[0],
        median_ess: median,
        grad_calls: trace.grad_evals,
        divergences: trace.divergences,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_poisson(
    scenario_ids: &[u32],
    samplers: &[SamplerName],
    n_groups: usize,
    group_size: usize,
    n_steps: usize,
    replicates: u32,
    kappa: f64,
    hmc_leapfrog_steps: usize,
    seed: u64,
) -> PoissonResult {
    let mut datasets = Vec::new();
    for &scenario in scenario_ids {
        let (mu_star, sigma_eta) = poisson_scenario_params(scenario);
        let (data, resampled) = generate_poisson_data(
            mu_star,
            sigma_eta,
            n_groups,
            group_size,
            poisson_data_seed(seed, scenario),
        );
        assert_eq!(resampled, 0, "scenario rates stay in the safe range");
        datasets.push((scenario, data));
    }
    let mut combos = Vec::new();
    for (scenario, data) in &datasets {
        for &sampler in samplers {
            combos.push((*scenario, data.clone(), sampler));
        }
    }
    let rows: Vec<PoissonRow> = combos
        .par_iter()
        .enumerate()
        .map(|(combo_idx, (scenario, data, sampler))| {
            let target = TargetModel::poisson_hierarchical(data);
            let reps: Vec<ReplicateEss> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    run_replicate(
                        &target,
                        data,
                        *sampler,
                        n_steps,
                        kappa,
                        hmc_leapfrog_steps,
                        seed,
                        combo_idx as u64 * replicates as u64 + r as u64,
                    )
                })
                .collect();
            let n = replicates as f64;
            let min_ess = reps.iter().map(|r| r.min_ess).sum::<f64>() / n;
            let median_ess = reps.iter().map(|r| r.median_ess).sum::<f64>() / n;
            let grad_calls = reps.iter().map(|r| r.grad_calls as f64).sum::<f64>() / n;
            let divergences = reps.iter().map(|r| r.divergences).sum::<u64>();
            let (per_g_mean, per_g_sd) = if sampler.family().uses_gradient() {
                let per_g: Vec<f64> = reps
                    .iter()
                    .map(|r| r.min_ess / r.grad_calls as f64 * 100.0)
                    .collect();
                let mean = per_g.iter().sum::<f64>() / n;
                let var = per_g.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (n - 1.0).max(1.0);
                (Some(mean), Some(var.sqrt()))
            } else {
                (None, None)
            };
            PoissonRow {
                scenario: *scenario,
                sampler: *sampler,
                iterations: n_steps,
                leapfrog_steps: (*sampler == SamplerName::Hmc).then_some(hmc_leapfrog_steps),
                grad_calls,
                min_ess,
                median_ess,
                min_ess_per_100g_mean: per_g_mean,
                min_ess_per_100g_sd: per_g_sd,
                divergences,
            }
        })
        .collect();
    let mut warnings = Vec::new();
    for row in &rows {
        let total_steps = n_steps as u64 * replicates as u64;
        if row.divergences * 2 >= total_steps {
            warnings.push(format!(
                "scenario {} {}: {} of {} steps were divergence-flagged",
                row.scenario,
                row.sampler.name(),
                row.divergences,
                total_steps
            ));
        }
    }
    PoissonResult {
        rows,
        datasets,
        warnings,
    }
}
