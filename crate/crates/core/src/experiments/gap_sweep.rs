//! Spectral-gap decay under target compression: exact grid gaps of each
//! family on the scaled one-dimensional Gaussian, plus the random-target
//! comparison of the random walk against the global-flip variant.

use rayon::prelude::*;

use crate::gap_lab::{build_grid_chain, GapEstimate, GridChain};
use crate::proposals::ProposalKernel;
use crate::sampler::replicate_rng;
use crate::scalar::Scalar;
use crate::targets::TargetModel;

use super::config::SamplerName;

#[derive(Clone, Debug)]
pub struct GapRow {
    pub family: SamplerName,
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub gap: f64,
    /// Conductance of the right half-line `x > 0`.
    pub conductance_right: f64,
    pub gap_refined: f64,
    pub stable: bool,
}

#[derive(Clone, Debug)]
pub struct GapSweepResult {
    pub rows: Vec<GapRow>,
}

impl GapSweepResult {
    pub fn gap(&self, family: SamplerName, lambda: f64) -> f64 {
        self.rows
            .iter()
            .find(|r| r.family == family && r.lambda == lambda)
            .expect("row present")
            .gap
    }
}

/// Kernel scale held fixed across the sweep: roughly optimal for the
/// unscaled (`lambda = 1`) standard Gaussian.
pub fn sweep_sigma(family: SamplerName) -> f64 {
    match family {
        SamplerName::Rwm => 2.4,
        SamplerName::Mala | SamplerName::Malta | SamplerName::Maltac => 1.0,
        _ => 1.7,
    }
}

/// Grid resolution rule: the domain tracks the compressed target
/// (`L = 8 lambda` standard deviations) and the spacing resolves it
/// (`dx <= lambda / 10`), so `n = 160` cells at every sweep point.
pub fn grid_for(lambda: f64) -> (usize, f64) {
    (160, 8.0 * lambda)
}

/// Gaps of each family targeting the scaled Gaussian, with the kernel fixed
/// at its `lambda = 1` scale. Every gap carries its doubled-resolution
/// cross-check.
pub fn run_gap_sweep(samplers: &[SamplerName], lambda_grid: &[f64]) -> GapSweepResult {
    let mut combos = Vec::new();
    for &family in samplers {
        for &lambda in lambda_grid {
            combos.push((family, lambda));
        }
    }
    let rows: Vec<GapRow> = combos
        .par_iter()
        .map(|&(family, lambda)| {
            let target = TargetModel::std_gaussian(1)
                .scale_family(lambda, 1)
                .expect("positive lambda");
            let kernel = kernel_1d(family, sweep_sigma(family));
            let (n, l) = grid_for(lambda);
            let chain = build_grid_chain(&target, &kernel, n, l);
            let gap = chain.spectral_gap();
            let refined = build_grid_chain(&target, &kernel, 2 * n, l).spectral_gap();
            let est = GapEstimate {
                gap,
                gap_refined: refined,
            };
            let right = chain.right_set(0.0);
            GapRow {
                family,
                lambda,
                n,
                l,
                gap,
                conductance_right: chain.conductance(&right),
                gap_refined: refined,
                stable: est.stable_within(0.02),
            }
        })
        .collect();
    GapSweepResult { rows }
}

fn kernel_1d(family: SamplerName, sigma: f64) -> ProposalKernel<f64> {
    match family {
        SamplerName::Rwm => ProposalKernel::rwm(sigma),
        SamplerName::Mala => ProposalKernel::mala(sigma),
        SamplerName::Barker => ProposalKernel::barker(sigma),
        SamplerName::BarkerGlobalFlip => ProposalKernel::barker_global_flip(sigma),
        SamplerName::Malta => ProposalKernel::malta(sigma, None),
        SamplerName::Maltac => ProposalKernel::maltac(sigma),
        SamplerName::Hmc => panic!("no grid chain for hmc: proposal density intractable"),
    }
    .expect("valid kernel")
}

#[derive(Clone, Debug)]
pub struct FlipComparisonRow {
    pub target: String,
    pub sigma: f64,
    pub gap_rwm: f64,
    pub gap_global_flip: f64,
}

/// Gap of the random walk against the global-flip variant on a seeded
/// family of one-dimensional targets, for the factor-two bound check.
pub fn rwm_vs_global_flip(seed: u64, count: usize) -> Vec<FlipComparisonRow> {
    let mut rng = replicate_rng(seed, (1 << 34) + 1);
    let mut rows = Vec::with_capacity(count);
    for k in 0..count {
        let u: f64 = f64::unit_uniform(&mut rng);
        let scale = 0.5 + 1.5 * u;
        let (target, name): (TargetModel<f64>, String) = match k % 4 {
            0 => (
                TargetModel::gaussian(vec![scale]),
                format!("gaussian(eta={scale:.3})"),
            ),
            1 => (
                TargetModel::hyperbolic(vec![scale], 0.1),
                format!("hyperbolic(eta={scale:.3})"),
            ),
            2 => (
                TargetModel::skew_normal(vec![scale], 4.0),
                format!("skew_normal(eta={scale:.3})"),
            ),
            _ => (
                TargetModel::exponential_family(1, 1.0, 1.5 + u),
                format!("exp_family(beta={:.3})", 1.5 + u),
            ),
        };
        let sigma = 1.0 + f64::unit_uniform(&mut rng);
        let l = 8.0 * target.known_cov_diag().unwrap()[0].sqrt().max(1.0);
        let n = 200;
        let rwm = build_grid_chain(&target, &ProposalKernel::rwm(sigma).unwrap(), n, l);
        let flip = build_grid_chain(
            &target,
            &ProposalKernel::barker_global_flip(sigma).unwrap(),
            n,
            l,
        );
        rows.push(FlipComparisonRow {
            target: name,
            sigma,
            gap_rwm: rwm.spectral_gap(),
            gap_global_flip: flip.spectral_gap(),
        });
    }
    rows
}

/// Convenience for tests: a grid chain for a named family.
pub fn grid_chain_for(
    family: SamplerName,
    sigma: f64,
    target: &TargetModel<f64>,
    n: usize,
    l: f64,
) -> GridChain<f64> {
    build_grid_chain(target, &kernel_1d(family, sigma), n, l)
}

#[derive(Clone, Debug)]
pub struct MalaRateFit {
    /// `(lambda, gap)` for every sweep point, resolved or not.
    pub points: Vec<(f64, f64)>,
    /// Points inside the decayed, refinement-stable window used for the fit.
    pub fitted: Vec<(f64, f64)>,
    /// Slope of `ln gap` against `lambda^{-2}`.
    pub slope: f64,
    pub r2: f64,
}

/// Rate check for the Langevin collapse: on a dense lambda window inside
/// the decay regime, `ln gap` is fitted against `lambda^{-2}`.
///
/// The exponential collapse crosses the whole f64-resolvable range within
/// one halving of lambda, so the fit uses a dense window rather than the
/// halving grid of [`run_gap_sweep`], and keeps only sweep points that are
/// decayed (`gap < 0.1`), resolved (`gap > 1e-10`), and grid-refinement
/// stable to 2%.
pub fn mala_rate_check() -> MalaRateFit {
    let sigma = 0.9;
    let lambdas = [0.42, 0.40, 0.38, 0.36, 0.34, 0.32];
    let n = 480;
    let estimates: Vec<(f64, f64, f64)> = lambdas
        .par_iter()
        .map(|&lambda| {
            let target = TargetModel::std_gaussian(1)
                .scale_family(lambda, 1)
                .expect("positive lambda");
            let kernel = ProposalKernel::mala(sigma).expect("valid sigma");
            let gap = build_grid_chain(&target, &kernel, n, 8.0 * lambda).spectral_gap();
            let refined = build_grid_chain(&target, &kernel, 2 * n, 8.0 * lambda).spectral_gap();
            (lambda, gap, refined)
        })
        .collect();
    let mut points = Vec::new();
    let mut fitted = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lambda, gap, refined) in estimates {
        points.push((lambda, gap));
        let est = GapEstimate {
            gap,
            gap_refined: refined,
        };
        if gap > 1e-10 && gap < 0.1 && est.stable_within(0.02) {
            fitted.push((lambda, gap));
            xs.push(lambda.powi(-2));
            ys.push(gap.ln());
        }
    }
    let (slope, _, r2) = crate::math::linear_fit(&xs, &ys);
    MalaRateFit {
        points,
        fitted,
        slope,
        r2,
    }
}
