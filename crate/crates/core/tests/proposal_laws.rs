//! Distribution-law checks for the proposal families: sampling laws against
//! quadrature CDFs, preconditioning equivalences, Langevin/locally-balanced
//! correspondences, and leapfrog exactness.

#![allow(clippy::needless_range_loop)]

mod common;

use barker_mcmc::math::{integrate, log_normal_pdf, logistic};
use barker_mcmc::proposals::{
    barker_log_density_1d, barker_propose_1d, lb_normalizer, BalancingFn, LowerTriangular,
    ProposalAux, ProposalKernel,
};
use barker_mcmc::sampler::{mh_step, replicate_rng, ChainState};
use barker_mcmc::scalar::Scalar;
use barker_mcmc::targets::TargetModel;
use common::{ks_distance, std_normal_pdf};

#[test]
fn rwm_moments_and_precond_covariance() {
    let target = TargetModel::std_gaussian(3);
    let x = [0.0, 0.0, 0.0];
    let chol = LowerTriangular::from_rows(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.6, 0.8, 0.0],
        vec![-0.4, 0.2, 1.3],
    ])
    .unwrap();
    let sigma = 0.9;
    let kernel = ProposalKernel::rwm(sigma)
        .unwrap()
        .with_precond_chol(chol.clone())
        .unwrap();
    let n = 100_000usize;
    let mut rng = replicate_rng(31, 0);
    let mut mean = [0.0f64; 3];
    let mut cov = [[0.0f64; 3]; 3];
    for _ in 0..n {
        let out = kernel.propose(&x, &[], &target, &mut rng);
        for i in 0..3 {
            mean[i] += out.y[i];
            for j in 0..3 {
                cov[i][j] += out.y[i] * out.y[j];
            }
        }
    }
    // expected displacement covariance: sigma^2 C C^T
    for i in 0..3 {
        mean[i] /= n as f64;
        let sd_i = (0..3).map(|k| chol.entry(i, k).powi(2)).sum::<f64>().sqrt() * sigma;
        assert!(
            mean[i].abs() < 4.0 * sd_i / (n as f64).sqrt(),
            "mean[{i}] = {}",
            mean[i]
        );
    }
    for i in 0..3 {
        for j in 0..3 {
            let want: f64 =
                sigma * sigma * (0..3).map(|k| chol.entry(i, k) * chol.entry(j, k)).sum::<f64>();
            let got = cov[i][j] / n as f64;
            assert!(
                (got - want).abs() < 0.03 * (1.0 + want.abs()),
                "cov[{i}][{j}] = {got}, want {want}"
            );
        }
    }
}

#[test]
fn mala_drift_and_zero_gradient_limit() {
    // standard normal target, x = 1, sigma = 0.5: drift mean 0.875
    let target = TargetModel::std_gaussian(1);
    let kernel = ProposalKernel::mala(0.5).unwrap();
    let x = [1.0];
    let grad = target.grad_log_density(&x);
    let mut rng = replicate_rng(32, 0);
    let n = 200_000usize;
    let mut mean = 0.0;
    for _ in 0..n {
        mean += kernel.propose(&x, &grad, &target, &mut rng).y[0];
    }
    mean /= n as f64;
    assert!(
        (mean - 0.875).abs() < 4.0 * 0.5 / (n as f64).sqrt(),
        "drift mean {mean}"
    );

    // zero gradient: identical to the random walk under a shared stream
    let flat = TargetModel::log_linear(vec![0.0], 0.0);
    let rwm = ProposalKernel::rwm(0.5).unwrap();
    let g0 = [0.0];
    for seed in 0..20 {
        let mut r1 = replicate_rng(33, seed);
        let mut r2 = replicate_rng(33, seed);
        let a = kernel.propose(&x, &g0, &flat, &mut r1);
        let b = rwm.propose(&x, &g0, &flat, &mut r2);
        assert_eq!(a.y[0].to_bits(), b.y[0].to_bits());
    }
}

/// The Langevin proposal is the locally-balanced kernel with g = sqrt:
/// pointwise log-densities agree after numeric normalization.
#[test]
fn mala_equals_generic_lb_with_sqrt_balancing() {
    let sigma = 0.7;
    let grad = 1.3;
    let kernel = ProposalKernel::mala(sigma).unwrap();
    let target: TargetModel<f64> = TargetModel::std_gaussian(1);
    let g = BalancingFn::<f64>::sqrt();
    let z = lb_normalizer(&g, grad, sigma);
    let x = [0.4];
    let gx = [grad];
    for k in 0..60 {
        let w = -2.5 + 5.0 * (k as f64) / 59.0;
        let y = [x[0] + w];
        let mala = kernel.log_q(&x, &gx, &y).unwrap();
        let lb = g.log_eval_exp(w * grad) + log_normal_pdf(w, sigma) - z.ln();
        assert!(
            (mala - lb).abs() < 1e-8,
            "w = {w}: mala {mala} vs lb {lb}"
        );
    }
    let _ = target;
}

#[test]
fn barker_1d_law_matches_quadrature_cdf() {
    // the acceptance suite runs the full Fig-1 grid; spot-check here
    let sigma = 1.0;
    let grad = 3.0;
    let mut rng = replicate_rng(34, 0);
    let mut samples: Vec<f64> = (0..50_000)
        .map(|_| barker_propose_1d(0.0, grad, sigma, &mut rng).y)
        .collect();
    let density = move |w: f64| barker_log_density_1d(w, grad, sigma).exp();
    let d = ks_distance(&mut samples, &density, -10.0);
    assert!(d < 0.009, "KS = {d}");
}

#[test]
fn barker_multivariate_zero_gradient_marginals() {
    let target = TargetModel::std_gaussian(3);
    let kernel = ProposalKernel::barker(1.0)
        .unwrap()
        .with_local_scales(vec![0.5, 1.0, 2.0])
        .unwrap();
    let x = [0.0; 3];
    let g = [0.0; 3];
    let mut rng = replicate_rng(35, 0);
    let n = 100_000usize;
    let mut sums = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    let mut flips = 0u64;
    for _ in 0..n {
        let out = kernel.propose(&x, &g, &target, &mut rng);
        for i in 0..3 {
            sums[i] += out.y[i];
            sq[i] += out.y[i] * out.y[i];
        }
        if let ProposalAux::Barker { flips: f, .. } = &out.aux {
            flips += f.iter().filter(|b| **b).count() as u64;
        }
    }
    for (i, s) in [0.5f64, 1.0, 2.0].iter().enumerate() {
        let mean = sums[i] / n as f64;
        let var = sq[i] / n as f64;
        assert!(mean.abs() < 4.0 * s / (n as f64).sqrt());
        assert!((var - s * s).abs() < 0.02 * s * s, "var[{i}] = {var}");
    }
    // flips are fair coins at zero gradient
    let rate = flips as f64 / (3 * n) as f64;
    assert!((rate - 0.5).abs() < 0.01, "flip rate {rate}");
}

#[test]
fn preconditioned_identity_matches_coordinatewise_bitwise() {
    let target: TargetModel<f64> = TargetModel::std_gaussian(2);
    let x = [0.3f64, -0.7];
    let grad = target.grad_log_density(&x);
    let plain = ProposalKernel::barker(0.8).unwrap();
    let precond = ProposalKernel::barker(0.8)
        .unwrap()
        .with_precond_chol(LowerTriangular::identity(2))
        .unwrap();
    for seed in 0..50 {
        let mut r1 = replicate_rng(36, seed);
        let mut r2 = replicate_rng(36, seed);
        let a = plain.propose(&x, &grad, &target, &mut r1);
        let b = precond.propose(&x, &grad, &target, &mut r2);
        for i in 0..2 {
            assert_eq!(a.y[i].to_bits(), b.y[i].to_bits());
        }
        assert!((a.log_q_fwd - b.log_q_fwd).abs() < 1e-12);
    }
}

/// The preconditioned Barker chain is the image under `C` of a plain Barker
/// chain on the pulled-back target. The plain chain is reconstructed here
/// step by step from the algorithmic definition (draw z, flip each sign
/// with the logistic probability, accept with the product-form rule), so
/// the equivalence is checked against an independent oracle path.
#[test]
fn preconditioned_chain_equals_transformed_chain() {
    let chol = LowerTriangular::from_rows(vec![vec![1.0, 0.0], vec![0.7, 0.6]]).unwrap();
    let sigma = 0.9;
    let target = TargetModel::gaussian(vec![1.0, 0.5]);
    let kernel = ProposalKernel::barker(sigma)
        .unwrap()
        .with_precond_chol(chol.clone())
        .unwrap();

    // implementation path
    let x0 = vec![0.4, -0.2];
    let mut rng_a = replicate_rng(37, 0);
    let mut state = ChainState::init(&target, x0.clone(), true);
    let mut impl_path = Vec::new();
    for _ in 0..1000 {
        mh_step(&mut state, &kernel, &target, &mut rng_a);
        impl_path.push(state.x.clone());
    }

    // oracle path: plain Barker on pi_tilde(u) = pi(C u), mapped through C
    let mut rng_b = replicate_rng(37, 0);
    let map = |u: &[f64]| -> Vec<f64> {
        chol.mul_vec(u)
            .iter()
            .map(|v| v * sigma)
            .collect::<Vec<f64>>()
    };
    // u coordinates: x = sigma * C u
    let mut u = {
        let scaled: Vec<f64> = x0.iter().map(|v| v / sigma).collect();
        chol.solve(&scaled)
    };
    let log_pi = |u: &[f64]| target.log_density(&map(u));
    let grad_u = |u: &[f64]| -> Vec<f64> {
        let gx = target.grad_log_density(&map(u));
        chol.tr_mul_vec(&gx).iter().map(|v| v * sigma).collect()
    };
    let mut oracle_path = Vec::new();
    for _ in 0..1000 {
        let g = grad_u(&u);
        let mut prop = u.clone();
        let mut z = [0.0f64; 2];
        for i in 0..2 {
            let zi = f64::std_normal(&mut rng_b);
            let keep = f64::unit_uniform(&mut rng_b) < logistic(zi * g[i]);
            z[i] = if keep { zi } else { -zi };
            prop[i] += z[i];
        }
        let gy = grad_u(&prop);
        let mut log_alpha = log_pi(&prop) - log_pi(&u);
        for i in 0..2 {
            log_alpha += (-z[i] * g[i]).exp().ln_1p() - (z[i] * gy[i]).exp().ln_1p();
        }
        if f64::unit_uniform(&mut rng_b) < log_alpha.min(0.0).exp() {
            u = prop;
        }
        oracle_path.push(map(&u));
    }

    let mut max_dev = 0.0f64;
    for (a, b) in impl_path.iter().zip(&oracle_path) {
        for i in 0..2 {
            max_dev = max_dev.max((a[i] - b[i]).abs());
        }
    }
    assert!(max_dev <= 1e-10, "max deviation {max_dev}");
}

#[test]
fn global_flip_zero_gradient_is_random_walk() {
    let kernel = ProposalKernel::barker_global_flip(1.3).unwrap();
    let target = TargetModel::std_gaussian(1);
    let mut rng = replicate_rng(38, 0);
    let mut samples: Vec<f64> = (0..60_000)
        .map(|_| kernel.propose(&[0.0], &[0.0], &target, &mut rng).y[0])
        .collect();
    let density = |w: f64| std_normal_pdf(w / 1.3) / 1.3;
    let d = ks_distance(&mut samples, &density, -14.0);
    assert!(d < 0.009, "KS = {d}");
}

#[test]
fn generic_lb_envelope_acceptance_is_z_over_m() {
    // Barker balancing: Z = 1/2, M = 1, so the envelope accepts half its
    // trials on average regardless of the gradient.
    let kernel = ProposalKernel::generic_lb(1.0, BalancingFn::barker()).unwrap();
    let target = TargetModel::std_gaussian(1);
    let mut rng = replicate_rng(39, 0);
    for grad in [0.0, 2.0, -7.0] {
        let mut draws = 0u64;
        let mut trials_total = 0u64;
        for _ in 0..100_000 {
            let out = kernel.propose(&[0.0], &[grad], &target, &mut rng);
            if let ProposalAux::GenericLb { trials } = &out.aux {
                draws += 1;
                trials_total += u64::from(trials[0]);
            }
        }
        let acceptance = draws as f64 / trials_total as f64;
        assert!(
            (acceptance - 0.5).abs() < 0.01,
            "grad {grad}: envelope acceptance {acceptance}"
        );
    }
}

#[test]
fn generic_lb_metropolis_law_matches_quadrature() {
    let sigma = 1.0;
    let grad = 1.5;
    let g = BalancingFn::<f64>::metropolis_min();
    let kernel = ProposalKernel::generic_lb(sigma, g.clone()).unwrap();
    let target = TargetModel::std_gaussian(1);
    let mut rng = replicate_rng(40, 0);
    let mut samples: Vec<f64> = (0..100_000)
        .map(|_| kernel.propose(&[0.0], &[grad], &target, &mut rng).y[0])
        .collect();
    let z = lb_normalizer(&g, grad, sigma);
    let density =
        move |w: f64| (g.log_eval_exp(w * grad) + log_normal_pdf(w, sigma)).exp() / z;
    let d = ks_distance(&mut samples, &density, -10.0);
    assert!(d < 0.006, "KS = {d}");
}

#[test]
fn generic_lb_zero_gradient_is_base_noise() {
    let kernel = ProposalKernel::generic_lb(0.8, BalancingFn::barker()).unwrap();
    let target = TargetModel::std_gaussian(1);
    let mut rng = replicate_rng(41, 0);
    let mut samples: Vec<f64> = (0..100_000)
        .map(|_| kernel.propose(&[0.0], &[0.0], &target, &mut rng).y[0])
        .collect();
    let density = |w: f64| std_normal_pdf(w / 0.8) / 0.8;
    let d = ks_distance(&mut samples, &density, -9.0);
    assert!(d < 0.006, "KS = {d}");
}

/// The spec quotes a bound of 1e-3 for the probability of a negative
/// displacement at gradient 50; the quadrature value of that probability is
/// in fact ~1.1e-2 (it decays as ~1.1/grad), so the limit property is
/// checked against the quadrature oracle at 50 and against the stated
/// threshold at a gradient where it genuinely holds.
#[test]
fn barker_right_truncation_limit() {
    let sigma = 1.0;
    let neg_prob = |grad: f64| -> f64 {
        let f = move |w: f64| barker_log_density_1d(w, grad, sigma).exp();
        integrate(&f, -10.0, 0.0, 1e-12)
    };
    let p50 = neg_prob(50.0);
    let mut rng = replicate_rng(42, 0);
    let n = 200_000;
    let emp = (0..n)
        .filter(|_| barker_propose_1d(0.0, 50.0, sigma, &mut rng).y < 0.0)
        .count() as f64
        / n as f64;
    assert!((emp - p50).abs() < 4.0 * (p50 / n as f64).sqrt() + 1e-4);
    assert!(p50 < 0.02, "P(neg | grad=50) = {p50}");
    assert!(neg_prob(2000.0) < 1e-3);
    // monotone vanishing
    assert!(neg_prob(200.0) < p50);
}

#[test]
fn barker_product_density_integrates_to_one_2d() {
    let kernel = ProposalKernel::barker(1.0)
        .unwrap()
        .with_local_scales(vec![0.8, 1.4])
        .unwrap();
    let x = [0.0, 0.0];
    let grad = [2.0, -0.7];
    // tensor quadrature of exp(log_q) over a generous window
    let inner = |w1: f64| {
        let f = |w2: f64| {
            kernel
                .log_q(&x, &grad, &[w1, w2])
                .unwrap()
                .exp()
        };
        integrate(&f, -12.0, 12.0, 1e-9)
    };
    let total = integrate(&inner, -8.0, 8.0, 1e-7);
    assert!((total - 1.0).abs() < 1e-6, "mass = {total}");
}

#[test]
fn hmc_leapfrog_matches_harmonic_closed_form() {
    // 1-d standard Gaussian: the leapfrog map is linear; compare against an
    // explicitly constructed 2x2 matrix power.
    let eps = 0.3;
    let steps = 25usize;
    let target = TargetModel::std_gaussian(1);
    let kernel = ProposalKernel::hmc(eps, steps).unwrap();
    let x0 = 1.7f64;
    let mut rng = replicate_rng(43, 0);
    let xi0 = f64::std_normal(&mut rng.clone());
    let out = kernel.propose(&[x0], &target.grad_log_density(&[x0]), &target, &mut rng);

    // closed form: half kick, (drift, full kick)^{L-1}, drift, half kick
    let kick = |m: [[f64; 2]; 2], w: f64| {
        // xi += -w x
        [
            [m[0][0], m[0][1]],
            [m[1][0] - w * m[0][0], m[1][1] - w * m[0][1]],
        ]
    };
    let drift = |m: [[f64; 2]; 2]| {
        // x += eps xi
        [
            [m[0][0] + eps * m[1][0], m[0][1] + eps * m[1][1]],
            [m[1][0], m[1][1]],
        ]
    };
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    m = kick(m, eps / 2.0);
    for j in 1..=steps {
        m = drift(m);
        m = kick(m, if j < steps { eps } else { eps / 2.0 });
    }
    let want_y = m[0][0] * x0 + m[0][1] * xi0;
    let want_xi = m[1][0] * x0 + m[1][1] * xi0;
    assert!((out.y[0] - want_y).abs() < 1e-10, "{} vs {want_y}", out.y[0]);
    if let ProposalAux::Hmc { xi_l, xi0: xi_init, .. } = &out.aux {
        assert!((xi_init[0] - xi0).abs() < 1e-15);
        assert!((xi_l[0] - want_xi).abs() < 1e-10);
    } else {
        panic!("hmc aux expected");
    }
}

#[test]
fn hmc_single_step_is_langevin() {
    let sigma = 0.45;
    let target: TargetModel<f64> = TargetModel::hyperbolic(vec![1.0, 2.0], 0.1);
    let hmc = ProposalKernel::hmc(sigma, 1).unwrap();
    let mala = ProposalKernel::mala(sigma).unwrap();
    let x = [0.8, -1.1];
    let (lp_x, grad) = target.log_density_and_grad(&x);
    for seed in 0..30 {
        let mut r1 = replicate_rng(44, seed);
        let mut r2 = replicate_rng(44, seed);
        let a = hmc.propose(&x, &grad, &target, &mut r1);
        let b = mala.propose(&x, &grad, &target, &mut r2);
        for i in 0..2 {
            assert!((a.y[i] - b.y[i]).abs() < 1e-12);
        }
        // identical acceptance ratio through either formulation
        let (lp_y, grad_y) = target.log_density_and_grad(&a.y);
        let log_r_hmc =
            (lp_y - lp_x) + (hmc.log_q_rev(&x, &a.y, &grad_y, &a.aux) - a.log_q_fwd);
        let log_r_mala =
            (lp_y - lp_x) + (mala.log_q_rev(&x, &b.y, &grad_y, &b.aux) - b.log_q_fwd);
        assert!(
            (log_r_hmc - log_r_mala).abs() < 1e-11,
            "{log_r_hmc} vs {log_r_mala}"
        );
    }
}

#[test]
fn hmc_exact_integration_limit_rejects_rarely() {
    // sigma -> 0 with L sigma fixed: the trajectory approaches the exact
    // flow and the rejection probability vanishes.
    let target = TargetModel::std_gaussian(1);
    let kernel = ProposalKernel::hmc(1e-3, 1000).unwrap();
    let mut state = ChainState::init(&target, vec![0.9], true);
    let mut rng = replicate_rng(45, 0);
    let mut reject_mass = 0.0;
    let n = 100;
    for _ in 0..n {
        let out = mh_step(&mut state, &kernel, &target, &mut rng);
        reject_mass += 1.0 - out.accept_prob;
    }
    assert!(reject_mass / (n as f64) < 0.01);
}

/// Leapfrog time-reversibility: integrating back from the proposal with the
/// negated final momentum recovers the starting point and momentum.
#[test]
fn hmc_trajectory_is_time_reversible() {
    let target = TargetModel::hyperbolic(vec![1.0, 0.5, 2.0], 0.1);
    let kernel = ProposalKernel::hmc(0.25, 12).unwrap();
    let x = vec![0.4, -0.9, 1.6];
    let grad = target.grad_log_density(&x);
    let mut rng = replicate_rng(46, 0);
    let out = kernel.propose(&x, &grad, &target, &mut rng);
    let (xi0, xi_l) = match &out.aux {
        ProposalAux::Hmc { xi0, xi_l, .. } => (xi0.clone(), xi_l.clone()),
        _ => panic!("hmc aux expected"),
    };
    // manual leapfrog from (y, -xi_l)
    let eps = 0.25;
    let mut pos = out.y.clone();
    let mut mom: Vec<f64> = xi_l.iter().map(|v| -v).collect();
    let mut g = target.grad_log_density(&pos);
    for i in 0..3 {
        mom[i] += 0.5 * eps * g[i];
    }
    for j in 1..=12 {
        for i in 0..3 {
            pos[i] += eps * mom[i];
        }
        g = target.grad_log_density(&pos);
        let w = if j < 12 { eps } else { 0.5 * eps };
        for i in 0..3 {
            mom[i] += w * g[i];
        }
    }
    for i in 0..3 {
        assert!((pos[i] - x[i]).abs() < 1e-10, "position {i}");
        assert!((-mom[i] - xi0[i]).abs() < 1e-10, "momentum {i}");
    }
}
