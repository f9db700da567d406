//! Shared oracles for the integration tests: Kolmogorov--Smirnov distances
//! against quadrature CDFs, finite-difference gradients, and small helpers.
//! These stay independent of the implementation paths they check.

#![allow(dead_code)]

use barker_mcmc::math::integrate;
use barker_mcmc::targets::TargetModel;

/// CDF values of `density` at each of the (sorted) sample points, by
/// cumulative quadrature from `lo`: adaptive for long gaps, fixed-node
/// Simpson for the tiny gaps between consecutive order statistics (whose
/// width^5 local error is far below the KS tolerances in play).
pub fn quadrature_cdf_at<F: Fn(f64) -> f64>(density: &F, lo: f64, sorted: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut acc = 0.0;
    let mut prev = lo;
    for &x in sorted {
        if x > prev {
            if x - prev > 0.05 {
                acc += integrate(density, prev, x, 1e-12);
            } else {
                let m = 0.5 * (prev + x);
                acc += (x - prev) / 6.0 * (density(prev) + 4.0 * density(m) + density(x));
            }
            prev = x;
        }
        out.push(acc);
    }
    out
}

/// Kolmogorov--Smirnov distance between the empirical law of `samples` and
/// the continuous CDF given by `density` (supported above `lo`).
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], density: &F, lo: f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cdf = quadrature_cdf_at(density, lo, samples);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, f) in cdf.iter().enumerate() {
        let hi = (i + 1) as f64 / n - f;
        let lo_gap = f - i as f64 / n;
        d = d.max(hi.abs()).max(lo_gap.abs());
    }
    d
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Central finite-difference gradient of the target's log-density.
pub fn fd_gradient(target: &TargetModel<f64>, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += h;
            dn[i] -= h;
            (target.log_density(&up) - target.log_density(&dn)) / (2.0 * h)
        })
        .collect()
}

/// Relative statement of gradient agreement used across the target tests.
pub fn assert_grad_matches_fd(target: &TargetModel<f64>, x: &[f64], rel_tol: f64) {
    let exact = target.grad_log_density(x);
    let fd = fd_gradient(target, x, 1e-5);
    for i in 0..x.len() {
        let scale = 1.0f64.max(exact[i].abs());
        assert!(
            (exact[i] - fd[i]).abs() <= rel_tol * scale,
            "coordinate {i} at {x:?}: exact {} vs fd {}",
            exact[i],
            fd[i]
        );
    }
}
