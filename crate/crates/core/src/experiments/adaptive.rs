//! The adaptive-tuning comparison on heterogeneous targets: convergence of
//! the tuning parameters (d_t, tau_adapt) and first-moment MSE at the
//! half-way and final checkpoints.

use rayon::prelude::*;

use crate::adaptation::{default_initialization, AdaptationSettings, AdaptationState};
use crate::diagnostics::{tau_adapt, tuning_distance, TauAdapt};
use crate::sampler::{mh_step, replicate_rng, ChainState};
use crate::scalar::Scalar;
use crate::targets::TargetModel;

use super::config::SamplerName;
use super::kernel_for;
use super::scenarios::scenario_target;

/// Initial-point spread: each coordinate starts at `N(0, 10^2)`.
const INIT_SD: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct AdaptiveCombo {
    pub scenario: u32,
    pub sampler: SamplerName,
    /// Replicate-averaged tuning distance, index `t-1` holding `d_t`.
    pub d_mean: Vec<f64>,
    pub tau: TauAdapt,
    /// First-moment MSE of `x_i / eta_i` from the run truncated at half the
    /// steps (burn-in = a quarter), averaged over replicates.
    pub mse_mid: f64,
    /// Same from the full run (burn-in = half).
    pub mse_final: f64,
    /// Divergence-flagged steps across all replicates.
    pub divergences: u64,
    /// Per-step tuning trajectory of replicate 0, for plots:
    /// `(log_sigma, cov_diag)` thinned to every `trace_thin`-th step.
    pub trace_log_sigma: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct AdaptiveResult {
    pub combos: Vec<AdaptiveCombo>,
    pub dim: usize,
    pub n_steps: usize,
    pub replicates: u32,
}

impl AdaptiveResult {
    pub fn combo(&self, scenario: u32, sampler: SamplerName) -> &AdaptiveCombo {
        self.combos
            .iter()
            .find(|c| c.scenario == scenario && c.sampler == sampler)
            .expect("combo present")
    }
}

struct ReplicateOutcome {
    d_series: Vec<f64>,
    sq_err_mid: f64,
    sq_err_final: f64,
    divergences: u64,
    log_sigma_path: Option<Vec<f64>>,
}

/// One adaptively tuned chain, streaming: tuning distance each step and
/// window means for the two MSE checkpoints; no trace is stored.
fn run_replicate(
    target: &TargetModel<f64>,
    sampler: SamplerName,
    n_steps: usize,
    kappa: f64,
    seed: u64,
    stream: u64,
    keep_log_sigma: bool,
) -> ReplicateOutcome {
    let dim = target.dim();
    let truth_diag = target
        .known_cov_diag()
        .expect("scenario targets have exact covariances")
        .to_vec();
    let truth_mean = target.known_mean().expect("exact means").to_vec();
    let etas: Vec<f64> = truth_diag.iter().map(|v| v.sqrt()).collect();

    let mut rng = replicate_rng(seed, stream);
    let init: Vec<f64> = (0..dim)
        .map(|_| INIT_SD * f64::std_normal(&mut rng))
        .collect();
    let family = sampler.family();
    let (sigma0, alpha_star) = default_initialization(family, dim);
    let mut adapt = AdaptationState::new(
        sigma0,
        dim,
        AdaptationSettings::diagonal(kappa, alpha_star),
    );
    let base_kernel = kernel_for(sampler, sigma0, 10, None);
    let mut state = ChainState::init(target, init, family.uses_gradient());

    let mut d_series = Vec::with_capacity(n_steps);
    let mut divergences = 0u64;
    let mut log_sigma_path = keep_log_sigma.then(|| Vec::with_capacity(n_steps));
    // Window sums for the two checkpoints: (n/4, n/2] and (n/2, n].
    let mid_lo = n_steps / 4;
    let mid_hi = n_steps / 2;
    let mut sum_mid = vec![0.0f64; dim];
    let mut sum_final = vec![0.0f64; dim];
    for t in 1..=n_steps {
        let kernel_t = adapt.tuned_kernel(&base_kernel);
        let out = mh_step(&mut state, &kernel_t, target, &mut rng);
        adapt.update(&state.x, out.accept_prob);
        divergences += u64::from(out.divergent);
        d_series.push(tuning_distance(&adapt.cov_diag(), &truth_diag));
        if let Some(path) = log_sigma_path.as_mut() {
            path.push(adapt.log_sigma());
        }
        if t > mid_lo && t <= mid_hi {
            for (s, v) in sum_mid.iter_mut().zip(&state.x) {
                *s += *v;
            }
        }
        if t > mid_hi {
            for (s, v) in sum_final.iter_mut().zip(&state.x) {
                *s += *v;
            }
        }
    }
    let sq_err = |sums: &[f64], count: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..dim {
            let est = sums[i] / count as f64 / etas[i];
            let truth = truth_mean[i] / etas[i];
            acc += (est - truth) * (est - truth);
        }
        acc / dim as f64
    };
    ReplicateOutcome {
        d_series,
        sq_err_mid: sq_err(&sum_mid, mid_hi - mid_lo),
        sq_err_final: sq_err(&sum_final, n_steps - mid_hi),
        divergences,
        log_sigma_path,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_adaptive_scenarios(
    scenario_ids: &[u32],
    samplers: &[SamplerName],
    dim: usize,
    n_steps: usize,
    replicates: u32,
    kappa: f64,
    tau_epsilon: f64,
    seed: u64,
) -> AdaptiveResult {
    let mut combos = Vec::new();
    for &scenario in scenario_ids {
        for &sampler in samplers {
            combos.push((scenario, sampler));
        }
    }
    let results: Vec<AdaptiveCombo> = combos
        .par_iter()
        .enumerate()
        .map(|(combo_idx, &(scenario, sampler))| {
            let target = scenario_target(scenario, dim, seed);
            let outcomes: Vec<ReplicateOutcome> = (0..replicates)
                .into_par_iter()
                .map(|r| {
                    run_replicate(
                        &target,
                        sampler,
                        n_steps,
                        kappa,
                        seed,
                        combo_idx as u64 * replicates as u64 + r as u64,
                        r == 0,
                    )
                })
                .collect();
            let mut d_mean = vec![0.0f64; n_steps];
            let mut mse_mid = 0.0;
            let mut mse_final = 0.0;
            let mut divergences = 0;
            for o in &outcomes {
                for (acc, d) in d_mean.iter_mut().zip(&o.d_series) {
                    *acc += *d;
                }
                mse_mid += o.sq_err_mid;
                mse_final += o.sq_err_final;
                divergences += o.divergences;
            }
            for d in d_mean.iter_mut() {
                *d /= replicates as f64;
            }
            let tau = tau_adapt(&d_mean, tau_epsilon);
            AdaptiveCombo {
                scenario,
                sampler,
                tau,
                d_mean,
                mse_mid: mse_mid / replicates as f64,
                mse_final: mse_final / replicates as f64,
                divergences,
                trace_log_sigma: outcomes
                    .into_iter()
                    .next()
                    .and_then(|o| o.log_sigma_path)
                    .unwrap_or_default(),
            }
        })
        .collect();
    AdaptiveResult {
        combos: results,
        dim,
        n_steps,
        replicates,
    }
}
