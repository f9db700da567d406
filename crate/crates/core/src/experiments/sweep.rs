//! Step-size sweeps: expected squared jump distance across a sigma grid,
//! and the grid-argmax scale search.

use rayon::prelude::*;

use crate::diagnostics::EsjdAccumulator;
use crate::proposals::ProposalKernel;
use crate::sampler::{mh_step, replicate_rng, ChainState};
use crate::targets::TargetModel;

use super::config::SamplerName;
use super::kernel_for;

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub sampler: SamplerName,
    pub sigma: f64,
    pub replicate: u32,
    pub esjd: f64,
    pub mean_accept: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Replicate-averaged ESJD at one grid point.
    pub fn mean_esjd(&self, sampler: SamplerName, sigma: f64) -> f64 {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.sampler == sampler && r.sigma == sigma)
            .map(|r| r.esjd)
            .collect();
        assert!(!vals.is_empty(), "no rows for {sampler:?} at sigma {sigma}");
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Grid argmax of the replicate-averaged ESJD; ties resolve to the
    /// smallest sigma.
    pub fn optimal_sigma(&self, sampler: SamplerName, sigma_grid: &[f64]) -> (f64, f64) {
        let mut best = (sigma_grid[0], f64::NEG_INFINITY);
        for &sigma in sigma_grid {
            let esjd = self.mean_esjd(sampler, sigma);
            if esjd > best.1 {
                best = (sigma, esjd);
            }
        }
        best
    }
}

/// Run one chain and stream the Rao--Blackwellised ESJD and mean acceptance
/// over the post-burn-in steps, without storing a trace.
pub(crate) fn stream_esjd(
    target: &TargetModel<f64>,
    kernel: &ProposalKernel<f64>,
    init: Vec<f64>,
    n_steps: usize,
    burn_in: usize,
    seed: u64,
    stream: u64,
) -> (f64, f64) {
    let mut rng = replicate_rng(seed, stream);
    let mut state = ChainState::init(target, init, kernel.family().uses_gradient());
    let mut acc = EsjdAccumulator::default();
    let mut accept_sum = 0.0;
    let mut kept = 0u64;
    for t in 0..n_steps {
        let before = state.x.clone();
        let out = mh_step(&mut state, kernel, target, &mut rng);
        if t >= burn_in {
            let sq: f64 = before
                .iter()
                .zip(&out.proposal)
                .map(|(a, b)| (b - a) * (b - a))
                .sum();
            acc.push(out.accept_prob, sq);
            accept_sum += out.accept_prob;
            kept += 1;
        }
    }
    (acc.mean(), accept_sum / kept as f64)
}

/// ESJD of each sampler at each step size, `replicates` independent chains
/// per grid point. The chain starts from the target's exact mean (or the
/// origin) and discards the first tenth of the run.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    target: &TargetModel<f64>,
    samplers: &[SamplerName],
    sigma_grid: &[f64],
    n_steps: usize,
    replicates: u32,
    seed: u64,
    hmc_leapfrog_steps: usize,
    malta_delta: Option<f64>,
) -> SweepResult {
    let init: Vec<f64> = target
        .known_mean()
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| vec![0.0; target.dim()]);
    let mut tasks = Vec::new();
    for &sampler in samplers {
        for &sigma in sigma_grid {
            for replicate in 0..replicates {
                tasks.push((sampler, sigma, replicate));
            }
        }
    }
    let rows: Vec<SweepRow> = tasks
        .par_iter()
        .enumerate()
        .map(|(task_idx, &(sampler, sigma, replicate))| {
            let kernel = kernel_for(sampler, sigma, hmc_leapfrog_steps, malta_delta);
            let (esjd, mean_accept) = stream_esjd(
                target,
                &kernel,
                init.clone(),
                n_steps,
                n_steps / 10,
                seed,
                task_idx as u64,
            );
            SweepRow {
                sampler,
                sigma,
                replicate,
                esjd,
                mean_accept,
            }
        })
        .collect();
    SweepResult { rows }
}

/// The step size maximizing replicate-averaged ESJD over a grid.
pub fn optimal_sigma_search(
    sampler: SamplerName,
    target: &TargetModel<f64>,
    sigma_grid: &[f64],
    n_steps: usize,
    replicates: u32,
    seed: u64,
) -> (f64, f64) {
    assert!(!sigma_grid.is_empty(), "sigma grid must be non-empty");
    let result = run_sweep(
        target,
        &[sampler],
        sigma_grid,
        n_steps,
        replicates,
        seed,
        10,
        None,
    );
    result.optimal_sigma(sampler, sigma_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::TargetModel;

    #[test]
    fn degenerate_grid_returns_its_point() {
        let target = TargetModel::std_gaussian(1);
        let (sigma, _) =
            optimal_sigma_search(SamplerName::Rwm, &target, &[0.7], 500, 1, 5);
        assert_eq!(sigma, 0.7);
    }

    #[test]
    fn monotone_decreasing_esjd_picks_smallest() {
        // Fabricated rows: strictly decreasing ESJD over the grid.
        let rows = vec![
            SweepRow { sampler: SamplerName::Rwm, sigma: 1.0, replicate: 0, esjd: 3.0, mean_accept: 0.5 },
            SweepRow { sampler: SamplerName::Rwm, sigma: 2.0, replicate: 0, esjd: 2.0, mean_accept: 0.4 },
            SweepRow { sampler: SamplerName::Rwm, sigma: 4.0, replicate: 0, esjd: 1.0, mean_accept: 0.3 },
        ];
        let res = SweepResult { rows };
        let (sigma, esjd) = res.optimal_sigma(SamplerName::Rwm, &[1.0, 2.0, 4.0]);
        assert_eq!(sigma, 1.0);
        assert_eq!(esjd, 3.0);
    }
}
