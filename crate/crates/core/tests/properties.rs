//! Property tests: skew-symmetry of the directional flip, the balance
//! identity for every shipped balancing function, detailed balance of the
//! log-space Hastings terms, and metric invariances.

mod common;

use barker_mcmc::diagnostics::{ess, tv_distance_1d, tuning_distance};
use barker_mcmc::math::{log1p_exp, logistic};
use barker_mcmc::proposals::BalancingFn;
use proptest::prelude::*;

proptest! {
    /// p(x,z) + p(x,-z) = 1 in floating point, for any gradient-times-noise
    /// product the flip probability can see.
    #[test]
    fn flip_probability_skew_symmetry(zg in -1e300f64..1e300f64) {
        let p: f64 = logistic(zg);
        let q: f64 = logistic(-zg);
        prop_assert!((p + q - 1.0).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    /// g(t) = t g(1/t) for the shipped balancing functions on a huge range.
    #[test]
    fn balance_identity_shipped_functions(log10_t in -8.0f64..8.0f64) {
        let t = 10f64.powf(log10_t);
        for g in [BalancingFn::<f64>::barker(), BalancingFn::metropolis_min(), BalancingFn::sqrt()] {
            let lhs = g.eval(t);
            let rhs = t * g.eval(1.0 / t);
            prop_assert!(
                (lhs - rhs).abs() <= 1e-12 * lhs.max(1.0),
                "{}: g({t}) = {lhs} vs t g(1/t) = {rhs}", g.name()
            );
        }
    }

    /// The two-branch softplus keeps the pairwise Barker acceptance factor
    /// antisymmetric: factor(a,b) = -factor(b,a) exactly up to 1e-12.
    #[test]
    fn barker_factor_antisymmetry(a in -700.0f64..700.0, b in -700.0f64..700.0) {
        let f_ab = log1p_exp(a) - log1p_exp(b);
        let f_ba = log1p_exp(b) - log1p_exp(a);
        prop_assert!((f_ab + f_ba).abs() <= 1e-12 * (1.0 + f_ab.abs()));
    }

    /// ESS is invariant under affine maps of the series.
    #[test]
    fn ess_affine_invariance(scale in prop::sample::select(vec![-3.0f64, -0.5, 0.7, 10.0]),
                             shift in -5.0f64..5.0,
                             seed in 0u64..32) {
        let mut rng = barker_mcmc::sampler::replicate_rng(seed, 0);
        let mut x = 0.0f64;
        let xs: Vec<f64> = (0..2000).map(|_| {
            x = 0.6 * x + <f64 as barker_mcmc::Scalar>::std_normal(&mut rng);
            x
        }).collect();
        let mapped: Vec<f64> = xs.iter().map(|v| scale * v + shift).collect();
        let a = ess(&xs);
        let b = ess(&mapped);
        prop_assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
    }

    /// Total variation between Gaussians is symmetric and inside [0, 1].
    #[test]
    fn tv_symmetric_and_bounded(m in -3.0f64..3.0, s in 0.3f64..3.0) {
        let a = move |x: f64| (-0.5 * ((x - m) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        let b = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let lo = -14.0 * s.max(1.0);
        let hi = 14.0 * s.max(1.0);
        let ab = tv_distance_1d(a, b, lo, hi);
        let ba = tv_distance_1d(b, a, lo, hi);
        prop_assert!((ab - ba).abs() <= 1e-10);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab), "tv = {ab}");
    }

    /// Tuning distance is invariant under common rescaling of both
    /// covariance diagonals.
    #[test]
    fn tuning_distance_scaling_invariance(c in 0.01f64..100.0, seed in 0u64..64) {
        let mut rng = barker_mcmc::sampler::replicate_rng(seed, 1);
        let est: Vec<f64> = (0..8).map(|_| (0.5 + <f64 as barker_mcmc::Scalar>::unit_uniform(&mut rng)) * 2.0).collect();
        let truth: Vec<f64> = (0..8).map(|_| (0.5 + <f64 as barker_mcmc::Scalar>::unit_uniform(&mut rng)) * 2.0).collect();
        let d0 = tuning_distance(&est, &truth);
        let est_c: Vec<f64> = est.iter().map(|v| v * c).collect();
        let truth_c: Vec<f64> = truth.iter().map(|v| v * c).collect();
        let d1 = tuning_distance(&est_c, &truth_c);
        prop_assert!((d0 - d1).abs() <= 1e-10 * (1.0 + d0));
    }
}
