//! Acceptance-order fits: the decay order of `log alpha(x, x + sigma u)` as
//! `sigma -> 0`, which separates first-order (random walk) from third-order
//! (Barker, Langevin) schemes.

use crate::diagnostics::acceptance_order_fit;
use crate::sampler::replicate_rng;
use crate::scalar::Scalar;
use crate::targets::TargetModel;

use super::config::SamplerName;

#[derive(Clone, Debug)]
pub struct OrderRow {
    pub sampler: SamplerName,
    pub pair: u32,
    pub x: f64,
    pub u: f64,
    pub slope: f64,
}

#[derive(Clone, Debug)]
pub struct OrderResult {
    pub rows: Vec<OrderRow>,
}

impl OrderResult {
    pub fn slopes(&self, sampler: SamplerName) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.sampler == sampler)
            .map(|r| r.slope)
            .collect()
    }
}

/// Seeded evaluation points: magnitudes bounded away from zero so the
/// leading Taylor coefficient of the log-acceptance cannot vanish.
pub fn order_pairs(seed: u64, count: u32) -> Vec<(f64, f64)> {
    let mut rng = replicate_rng(seed, (1 << 34) + 2);
    (0..count)
        .map(|_| {
            let x = (0.4 + 1.1 * f64::unit_uniform(&mut rng)) * sign(&mut rng);
            let u = (0.5 + 1.0 * f64::unit_uniform(&mut rng)) * sign(&mut rng);
            (x, u)
        })
        .collect()
}

fn sign<R: rand::Rng>(rng: &mut R) -> f64 {
    if f64::unit_uniform(rng) < 0.5 {
        1.0
    } else {
        -1.0
    }
}

pub fn run_acceptance_order(
    samplers: &[SamplerName],
    sigma_grid: &[f64],
    pairs: u32,
    seed: u64,
) -> OrderResult {
    let target = TargetModel::std_gaussian(1);
    let points = order_pairs(seed, pairs);
    let mut rows = Vec::new();
    for &sampler in samplers {
        for (k, &(x, u)) in points.iter().enumerate() {
            let slope =
                acceptance_order_fit(sampler.family(), None, &target, x, u, sigma_grid);
            rows.push(OrderRow {
                sampler,
                pair: k as u32,
                x,
                u,
                slope,
            });
        }
    }
    OrderResult { rows }
}
