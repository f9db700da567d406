//! Dimension-scaling study on iid targets with per-family optimized step
//! size: ESJD per coordinate against dimension.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::math::linear_fit;
use crate::scalar::Scalar;
use crate::targets::TargetModel;

use super::config::SamplerName;
use super::kernel_for;
use super::sweep::stream_esjd;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingTargetKind {
    Gaussian,
    Hyperbolic,
}

impl ScalingTargetKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingTargetKind::Gaussian => "gaussian",
            ScalingTargetKind::Hyperbolic => "hyperbolic",
        }
    }

    fn build(&self, dim: usize) -> TargetModel<f64> {
        match self {
            ScalingTargetKind::Gaussian => TargetModel::std_gaussian(dim),
            ScalingTargetKind::Hyperbolic => TargetModel::hyperbolic(vec![1.0; dim], 0.1),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingRow {
    pub target: ScalingTargetKind,
    pub sampler: SamplerName,
    pub dim: usize,
    pub sigma_opt: f64,
    pub esjd_per_coord: f64,
    pub mean_accept: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
}

impl ScalingResult {
    pub fn row(&self, target: ScalingTargetKind, sampler: SamplerName, dim: usize) -> &ScalingRow {
        self.rows
            .iter()
            .find(|r| r.target == target && r.sampler == sampler && r.dim == dim)
            .expect("row present")
    }

    /// Log-log slope of ESJD per coordinate against dimension.
    pub fn slope(&self, target: ScalingTargetKind, sampler: SamplerName) -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for r in &self.rows {
            if r.target == target && r.sampler == sampler {
                xs.push((r.dim as f64).ln());
                ys.push(r.esjd_per_coord.ln());
            }
        }
        linear_fit(&xs, &ys).0
    }

    pub fn esjd_ratio(
        &self,
        target: ScalingTargetKind,
        num: SamplerName,
        den: SamplerName,
        dim: usize,
    ) -> f64 {
        self.row(target, num, dim).esjd_per_coord / self.row(target, den, dim).esjd_per_coord
    }
}

/// Theory-guided center of the step-size search grid for iid targets.
fn sigma_center(sampler: SamplerName, dim: usize) -> f64 {
    let d = dim as f64;
    match sampler {
        SamplerName::Rwm => 2.38 / d.sqrt(),
        // Langevin-type and Barker scale as d^{-1/6}
        _ => 1.65 / d.powf(1.0 / 6.0),
    }
}

const SEARCH_MULTIPLIERS: [f64; 7] = [0.5, 0.67, 0.85, 1.0, 1.2, 1.5, 2.0];

/// For each (target, sampler, dim): pick sigma by ESJD argmax over a
/// multiplier grid around the theoretical center, then measure ESJD per
/// coordinate at the optimum with replicated longer runs.
pub fn run_scaling(
    targets: &[ScalingTargetKind],
    samplers: &[SamplerName],
    dim_grid: &[usize],
    n_steps: usize,
    replicates: u32,
    seed: u64,
) -> ScalingResult {
    let mut combos = Vec::new();
    for &target in targets {
        for &sampler in samplers {
            for &dim in dim_grid {
                combos.push((target, sampler, dim));
            }
        }
    }
    // Streams: each combo owns a block of stream ids, replicates inside.
    let streams_per_combo = (SEARCH_MULTIPLIERS.len() as u64) + replicates as u64;
    let rows: Vec<ScalingRow> = combos
        .par_iter()
        .enumerate()
        .map(|(combo_idx, &(target_kind, sampler, dim))| {
            let target = target_kind.build(dim);
            let base_stream = combo_idx as u64 * streams_per_combo;
            let init = stationary_ish_init(&target, seed, base_stream);
            let search_steps = (n_steps / 4).max(2_000);
            let burn = search_steps / 5;
            // grid search
            let mut best = (f64::NAN, f64::NEG_INFINITY);
            for (k, mult) in SEARCH_MULTIPLIERS.iter().enumerate() {
                let sigma = sigma_center(sampler, dim) * mult;
                let kernel = kernel_for(sampler, sigma, 10, None);
                let (esjd, _) = stream_esjd(
                    &target,
                    &kernel,
                    init.clone(),
                    search_steps,
                    burn,
                    seed,
                    base_stream + k as u64,
                );
                if esjd > best.1 {
                    best = (sigma, esjd);
                }
            }
            let sigma_opt = best.0;
            // measurement runs
            let kernel = kernel_for(sampler, sigma_opt, 10, None);
            let mut esjd_sum = 0.0;
            let mut accept_sum = 0.0;
            for r in 0..replicates {
                let (esjd, acc) = stream_esjd(
                    &target,
                    &kernel,
                    init.clone(),
                    n_steps,
                    n_steps / 5,
                    seed,
                    base_stream + SEARCH_MULTIPLIERS.len() as u64 + r as u64,
                );
                esjd_sum += esjd;
                accept_sum += acc;
            }
            ScalingRow {
                target: target_kind,
                sampler,
                dim,
                sigma_opt,
                esjd_per_coord: esjd_sum / replicates as f64 / dim as f64,
                mean_accept: accept_sum / replicates as f64,
            }
        })
        .collect();
    ScalingResult { rows }
}

/// Start near the typical set: exact draw for the Gaussian, a scale-matched
/// Gaussian cloud otherwise (the burn-in absorbs the difference).
fn stationary_ish_init(target: &TargetModel<f64>, seed: u64, stream: u64) -> Vec<f64> {
    let mut rng = crate::sampler::replicate_rng(seed, (1 << 33) + stream);
    let sds: Vec<f64> = target
        .known_cov_diag()
        .expect("scaling targets have moments")
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let means = target.known_mean().expect("scaling targets have moments");
    (0..target.dim())
        .map(|i| means[i] + sds[i] * f64::std_normal(&mut rng))
        .collect()
}
