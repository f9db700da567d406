//! Analytic target distributions with exact log-densities and gradients.
//!
//! All log-densities are unnormalized with an instance-fixed constant; the
//! Metropolis--Hastings machinery only ever uses differences. Where the
//! normalizing constant is analytically free (Gaussian, skew-normal) it is
//! included so the documented point values hold. Hyperbolic targets use the
//! zero-offset convention.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{integrate, log_normal_cdf, normal_hazard};
use crate::scalar::{cast, positive, Scalar};

#[derive(Debug, Error)]
pub enum TargetError {
    #[error("scale factor must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("scaled coordinate count must be in 1..=dim, got k={k} for dim {dim}")]
    BadScaledCount { k: usize, dim: usize },
}

/// A differentiable unnormalized log-density on R^d, with optional exact
/// first and second moments used by the error metrics.
#[derive(Clone, Debug)]
pub struct TargetModel<T: Scalar> {
    dim: usize,
    kind: TargetKind<T>,
    known_mean: Option<Vec<T>>,
    known_cov_diag: Option<Vec<T>>,
}

#[derive(Clone, Debug)]
enum TargetKind<T: Scalar> {
    Gaussian {
        means: Vec<T>,
        scales: Vec<T>,
    },
    Hyperbolic {
        scales: Vec<T>,
        epsilon: T,
    },
    SkewNormal {
        scales: Vec<T>,
        alpha: T,
    },
    ExponentialFamily {
        alpha: T,
        beta: T,
    },
    IidProduct {
        base: Box<TargetModel<T>>,
    },
    PoissonHierarchical {
        group_sums: Vec<T>,
        group_sizes: Vec<T>,
        sigma_eta: T,
        prior_sd_mu: T,
        log_factorial_term: T,
    },
    LogLinear {
        slope: Vec<T>,
        intercept: T,
    },
    Scaled {
        base: Box<TargetModel<T>>,
        lambda: T,
        k: usize,
    },
}

impl<T: Scalar> TargetModel<T> {
    /// Zero-mean Gaussian with per-coordinate standard deviations.
    pub fn gaussian(scales: Vec<T>) -> Self {
        let means = vec![T::zero(); scales.len()];
        Self::gaussian_with_mean(means, scales)
    }

    /// Standard Gaussian in `dim` dimensions.
    pub fn std_gaussian(dim: usize) -> Self {
        Self::gaussian(vec![T::one(); dim])
    }

    pub fn gaussian_with_mean(means: Vec<T>, scales: Vec<T>) -> Self {
        assert_eq!(means.len(), scales.len(), "means/scales length mismatch");
        assert!(!scales.is_empty(), "dimension must be positive");
        assert!(
            scales.iter().all(|s| *s > T::zero()),
            "scales must be positive"
        );
        let cov = scales.iter().map(|s| *s * *s).collect();
        TargetModel {
            dim: scales.len(),
            known_mean: Some(means.clone()),
            known_cov_diag: Some(cov),
            kind: TargetKind::Gaussian { means, scales },
        }
    }

    /// Smoothed-Laplace coordinates: `log pi = -sum_i sqrt(eps + (x_i/eta_i)^2)`.
    pub fn hyperbolic(scales: Vec<T>, epsilon: T) -> Self {
        assert!(!scales.is_empty(), "dimension must be positive");
        assert!(epsilon > T::zero(), "epsilon must be positive");
        assert!(
            scales.iter().all(|s| *s > T::zero()),
            "scales must be positive"
        );
        let base_var = hyperbolic_base_variance(epsilon);
        let cov = scales.iter().map(|s| *s * *s * base_var).collect();
        TargetModel {
            dim: scales.len(),
            known_mean: Some(vec![T::zero(); scales.len()]),
            known_cov_diag: Some(cov),
            kind: TargetKind::Hyperbolic { scales, epsilon },
        }
    }

    /// Independent skew-normal coordinates with common skewness `alpha`.
    pub fn skew_normal(scales: Vec<T>, alpha: T) -> Self {
        assert!(!scales.is_empty(), "dimension must be positive");
        assert!(
            scales.iter().all(|s| *s > T::zero()),
            "scales must be positive"
        );
        let delta = alpha / (T::one() + alpha * alpha).sqrt();
        let two_over_pi = cast::<T>(2.0) / T::PI();
        let mean_unit = delta * two_over_pi.sqrt();
        let var_unit = T::one() - two_over_pi * delta * delta;
        let mean = scales.iter().map(|s| *s * mean_unit).collect();
        let cov = scales.iter().map(|s| *s * *s * var_unit).collect();
        TargetModel {
            dim: scales.len(),
            known_mean: Some(mean),
            known_cov_diag: Some(cov),
            kind: TargetKind::SkewNormal { scales, alpha },
        }
    }

    /// `log pi = -alpha * sum_i |x_i|^beta`; light tails for beta > 2.
    pub fn exponential_family(dim: usize, alpha: T, beta: T) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert!(alpha > T::zero() && beta > T::zero());
        // E[X^2] for density prop to exp(-alpha |x|^beta).
        let var = alpha.powf(-cast::<T>(2.0) / beta)
            * ((cast::<T>(3.0) / beta).ln_gamma() - (T::one() / beta).ln_gamma()).exp();
        TargetModel {
            dim,
            known_mean: Some(vec![T::zero(); dim]),
            known_cov_diag: Some(vec![var; dim]),
            kind: TargetKind::ExponentialFamily { alpha, beta },
        }
    }

    /// `copies` iid coordinates each following a one-dimensional base model.
    pub fn iid_product(base: TargetModel<T>, copies: usize) -> Self {
        assert_eq!(base.dim, 1, "iid_product requires a one-dimensional base");
        assert!(copies > 0, "dimension must be positive");
        let known_mean = base.known_mean.as_ref().map(|m| vec![m[0]; copies]);
        let known_cov_diag = base.known_cov_diag.as_ref().map(|c| vec![c[0]; copies]);
        TargetModel {
            dim: copies,
            known_mean,
            known_cov_diag,
            kind: TargetKind::IidProduct {
                base: Box::new(base),
            },
        }
    }

    /// Improper log-linear density `a . x + b`; its gradient is constant.
    pub fn log_linear(slope: Vec<T>, intercept: T) -> Self {
        assert!(!slope.is_empty(), "dimension must be positive");
        TargetModel {
            dim: slope.len(),
            known_mean: None,
            known_cov_diag: None,
            kind: TargetKind::LogLinear { slope, intercept },
        }
    }

    /// Posterior of the Poisson random-effects model for `data`, over the
    /// parameter vector `(mu, eta_1, ..., eta_I)`.
    pub fn poisson_hierarchical(data: &PoissonDataset) -> Self {
        assert!(data.sigma_eta > 0.0, "sigma_eta must be positive");
        assert!(data.prior_sd_mu > 0.0, "prior_sd_mu must be positive");
        assert!(!data.groups.is_empty(), "need at least one group");
        let group_sums = data
            .groups
            .iter()
            .map(|g| cast::<T>(g.iter().map(|y| *y as f64).sum::<f64>()))
            .collect();
        let group_sizes = data
            .groups
            .iter()
            .map(|g| cast::<T>(g.len() as f64))
            .collect();
        let log_factorial_term = -data
            .groups
            .iter()
            .flatten()
            .map(|y| cast::<T>(*y as f64 + 1.0).ln_gamma())
            .sum::<T>();
        TargetModel {
            dim: data.groups.len() + 1,
            known_mean: None,
            known_cov_diag: None,
            kind: TargetKind::PoissonHierarchical {
                group_sums,
                group_sizes,
                sigma_eta: cast(data.sigma_eta),
                prior_sd_mu: cast(data.prior_sd_mu),
                log_factorial_term,
            },
        }
    }

    /// The scaled family: compress the first `k` coordinates by `lambda`.
    ///
    /// The returned density is `lambda^{-k} pi(x_1/lambda, ..., x_k/lambda,
    /// x_{k+1}, ...)`.
    pub fn scale_family(self, lambda: T, k: usize) -> Result<Self, TargetError> {
        if !positive(lambda) {
            return Err(TargetError::NonPositiveLambda(
                lambda.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if k == 0 || k > self.dim {
            return Err(TargetError::BadScaledCount { k, dim: self.dim });
        }
        let scale_moment = |v: &Vec<T>, pow: i32| -> Vec<T> {
            v.iter()
                .enumerate()
                .map(|(i, m)| if i < k { *m * lambda.powi(pow) } else { *m })
                .collect()
        };
        let known_mean = self.known_mean.as_ref().map(|m| scale_moment(m, 1));
        let known_cov_diag = self.known_cov_diag.as_ref().map(|c| scale_moment(c, 2));
        Ok(TargetModel {
            dim: self.dim,
            known_mean,
            known_cov_diag,
            kind: TargetKind::Scaled {
                base: Box::new(self),
                lambda,
                k,
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_mean(&self) -> Option<&[T]> {
        self.known_mean.as_deref()
    }

    pub fn known_cov_diag(&self) -> Option<&[T]> {
        self.known_cov_diag.as_deref()
    }

    /// Short description used in run manifests.
    pub fn describe(&self) -> String {
        match &self.kind {
            TargetKind::Gaussian { .. } => format!("gaussian(d={})", self.dim),
            TargetKind::Hyperbolic { epsilon, .. } => {
                format!("hyperbolic(d={}, eps={})", self.dim, epsilon)
            }
            TargetKind::SkewNormal { alpha, .. } => {
                format!("skew_normal(d={}, alpha={})", self.dim, alpha)
            }
            TargetKind::ExponentialFamily { alpha, beta } => {
                format!("exponential_family(d={}, alpha={alpha}, beta={beta})", self.dim)
            }
            TargetKind::IidProduct { base } => format!("iid[{} x {}]", base.describe(), self.dim),
            TargetKind::PoissonHierarchical { .. } => {
                format!("poisson_hierarchical(d={})", self.dim)
            }
            TargetKind::LogLinear { .. } => format!("log_linear(d={})", self.dim),
            TargetKind::Scaled { base, lambda, k } => {
                format!("scaled[{}](lambda={lambda}, k={k})", base.describe())
            }
        }
    }

    pub fn log_density(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.dim, "log_density: dimension mismatch");
        match &self.kind {
            TargetKind::Gaussian { means, scales } => {
                let half = cast::<T>(0.5);
                let mut acc = -half * cast::<T>(self.dim as f64) * T::TAU().ln();
                for i in 0..self.dim {
                    let z = (x[i] - means[i]) / scales[i];
                    acc -= half * z * z + scales[i].ln();
                }
                acc
            }
            TargetKind::Hyperbolic { scales, epsilon } => {
                let mut acc = T::zero();
                for i in 0..self.dim {
                    let z = x[i] / scales[i];
                    acc -= (*epsilon + z * z).sqrt();
                }
                acc
            }
            TargetKind::SkewNormal { scales, alpha } => {
                let half = cast::<T>(0.5);
                let mut acc = cast::<T>(self.dim as f64)
                    * (cast::<T>(2.0).ln() - half * T::TAU().ln());
                for i in 0..self.dim {
                    let z = x[i] / scales[i];
                    acc += -half * z * z - scales[i].ln() + log_normal_cdf(*alpha * z);
                }
                acc
            }
            TargetKind::ExponentialFamily { alpha, beta } => {
                -*alpha * x.iter().map(|xi| xi.abs().powf(*beta)).sum::<T>()
            }
            TargetKind::IidProduct { base } => {
                x.iter().map(|xi| base.log_density(&[*xi])).sum::<T>()
            }
            TargetKind::PoissonHierarchical {
                group_sums,
                group_sizes,
                sigma_eta,
                prior_sd_mu,
                log_factorial_term,
            } => {
                let half = cast::<T>(0.5);
                let mu = x[0];
                let mut acc = *log_factorial_term;
                // mu prior
                acc += -half * (mu / *prior_sd_mu) * (mu / *prior_sd_mu)
                    - prior_sd_mu.ln()
                    - half * T::TAU().ln();
                for (i, (s, n)) in group_sums.iter().zip(group_sizes).enumerate() {
                    let eta = x[i + 1];
                    acc += *s * eta - *n * eta.exp();
                    let z = (eta - mu) / *sigma_eta;
                    acc += -half * z * z - sigma_eta.ln() - half * T::TAU().ln();
                }
                acc
            }
            TargetKind::LogLinear { slope, intercept } => {
                *intercept + slope.iter().zip(x).map(|(a, xi)| *a * *xi).sum::<T>()
            }
            TargetKind::Scaled { base, lambda, k } => {
                let mapped: Vec<T> = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| if i < *k { *xi / *lambda } else { *xi })
                    .collect();
                -cast::<T>(*k as f64) * lambda.ln() + base.log_density(&mapped)
            }
        }
    }

    pub fn grad_log_density(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim, "grad_log_density: dimension mismatch");
        match &self.kind {
            TargetKind::Gaussian { means, scales } => (0..self.dim)
                .map(|i| -(x[i] - means[i]) / (scales[i] * scales[i]))
                .collect(),
            TargetKind::Hyperbolic { scales, epsilon } => (0..self.dim)
                .map(|i| {
                    let z = x[i] / scales[i];
                    -(x[i] / (scales[i] * scales[i])) / (*epsilon + z * z).sqrt()
                })
                .collect(),
            TargetKind::SkewNormal { scales, alpha } => (0..self.dim)
                .map(|i| {
                    let z = x[i] / scales[i];
                    (-z + *alpha * normal_hazard(*alpha * z)) / scales[i]
                })
                .collect(),
            TargetKind::ExponentialFamily { alpha, beta } => x
                .iter()
                .map(|xi| {
                    if *xi == T::zero() {
                        T::zero()
                    } else {
                        -*alpha * *beta * xi.abs().powf(*beta - T::one()) * xi.signum()
                    }
                })
                .collect(),
            TargetKind::IidProduct { base } => x
                .iter()
                .map(|xi| base.grad_log_density(&[*xi])[0])
                .collect(),
            TargetKind::PoissonHierarchical {
                group_sums,
                group_sizes,
                sigma_eta,
                prior_sd_mu,
                ..
            } => {
                let mu = x[0];
                let var_eta = *sigma_eta * *sigma_eta;
                let mut grad = vec![T::zero(); self.dim];
                grad[0] = -mu / (*prior_sd_mu * *prior_sd_mu);
                for (i, (s, n)) in group_sums.iter().zip(group_sizes).enumerate() {
                    let eta = x[i + 1];
                    grad[0] += (eta - mu) / var_eta;
                    grad[i + 1] = *s - *n * eta.exp() - (eta - mu) / var_eta;
                }
                grad
            }
            TargetKind::LogLinear { slope, .. } => slope.clone(),
            TargetKind::Scaled { base, lambda, k } => {
                let mapped: Vec<T> = x
                    .iter()
                    .enumerate()
                    .map(|(i, xi)| if i < *k { *xi / *lambda } else { *xi })
                    .collect();
                let mut g = base.grad_log_density(&mapped);
                for gi in g.iter_mut().take(*k) {
                    *gi /= *lambda;
                }
                g
            }
        }
    }

    pub fn log_density_and_grad(&self, x: &[T]) -> (T, Vec<T>) {
        (self.log_density(x), self.grad_log_density(x))
    }
}

/// Variance of the unit-scale hyperbolic density `exp(-sqrt(eps + x^2))`,
/// by quadrature; the tails are sub-exponential so the window is generous.
fn hyperbolic_base_variance<T: Scalar>(epsilon: T) -> T {
    let eps = epsilon.to_f64().expect("epsilon finite");
    let f = |x: f64| (-(eps + x * x).sqrt()).exp();
    let f2 = |x: f64| x * x * f(x);
    let mass = integrate(&f, -150.0, 150.0, 1e-13);
    let second = integrate(&f2, -150.0, 150.0, 1e-13);
    cast(second / mass)
}

/// Observed counts for the Poisson random-effects posterior, plus the
/// generating configuration for provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonDataset {
    pub sigma_eta: f64,
    pub prior_sd_mu: f64,
    pub mu_star: f64,
    pub groups: Vec<Vec<u64>>,
    pub seed: u64,
}

impl PoissonDataset {
    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn n_observations(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Largest Poisson rate the count sampler is trusted with; rates above this
/// trigger a resample of the offending group effect.
const MAX_POISSON_RATE: f64 = 1e12;

/// Draw a dataset from the generative model: `eta_i* ~ N(mu*, sigma_eta^2)`,
/// `y_ij ~ Poisson(exp(eta_i*))`. Deterministic for a fixed seed. Returns
/// the dataset and the number of group effects that had to be redrawn
/// because `exp(eta_i*)` exceeded the sampler's safe range.
pub fn generate_poisson_data(
    mu_star: f64,
    sigma_eta: f64,
    n_groups: usize,
    group_size: usize,
    seed: u64,
) -> (PoissonDataset, u32) {
    assert!(n_groups >= 1 && group_size >= 1);
    assert!(sigma_eta >= 0.0, "sigma_eta must be nonnegative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resampled = 0u32;
    let mut groups = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        let rate = loop {
            let eta_star = mu_star + sigma_eta * f64::std_normal(&mut rng);
            let rate = eta_star.exp();
            if rate.is_finite() && rate <= MAX_POISSON_RATE {
                break rate;
            }
            resampled += 1;
        };
        let pois = Poisson::new(rate.max(f64::MIN_POSITIVE)).expect("valid Poisson rate");
        let counts = (0..group_size)
            .map(|_| pois.sample(&mut rng) as u64)
            .collect();
        groups.push(counts);
    }
    (
        PoissonDataset {
            sigma_eta,
            prior_sd_mu: 10.0,
            mu_star,
            groups,
            seed,
        },
        resampled,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_normalized_point_value() {
        let m: TargetModel<f64> = TargetModel::std_gaussian(2);
        let v = m.log_density(&[0.0, 0.0]);
        assert!((v + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_score_is_minus_x() {
        let m: TargetModel<f64> = TargetModel::std_gaussian(3);
        let g = m.grad_log_density(&[0.3, -1.2, 4.0]);
        assert_eq!(g, vec![-0.3, 1.2, -4.0]);
    }

    #[test]
    fn hyperbolic_zero_offset_value() {
        let m: TargetModel<f64> = TargetModel::hyperbolic(vec![1.0], 0.1);
        assert!((m.log_density(&[0.0]) + 0.1f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exponential_family_grad_point() {
        let m: TargetModel<f64> = TargetModel::exponential_family(1, 1.0, 4.0);
        let g = m.grad_log_density(&[2.0]);
        assert!((g[0] + 32.0).abs() < 1e-12);
        // beta < 2 singularity removed at the origin
        let m2: TargetModel<f64> = TargetModel::exponential_family(1, 1.0, 1.5);
        assert_eq!(m2.grad_log_density(&[0.0])[0], 0.0);
    }

    #[test]
    fn log_linear_gradient_constant() {
        let m: TargetModel<f64> = TargetModel::log_linear(vec![1.5, -2.0], 0.7);
        for x in [[0.0, 0.0], [3.0, -1.0], [100.0, 42.0]] {
            assert_eq!(m.grad_log_density(&x), vec![1.5, -2.0]);
        }
        assert!((m.log_density(&[2.0, 1.0]) - (0.7 + 3.0 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn scale_family_identity_and_point_value() {
        let base: TargetModel<f64> = TargetModel::std_gaussian(1);
        let same = base.clone().scale_family(1.0, 1).unwrap();
        for x in [-2.0, 0.0, 0.5, 7.0] {
            assert!((same.log_density(&[x]) - base.log_density(&[x])).abs() < 1e-14);
        }
        let squeezed = base.scale_family(0.1, 1).unwrap();
        let want = 10.0f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
        assert!((squeezed.log_density(&[0.0]) - want).abs() < 1e-12);
    }

    #[test]
    fn scale_family_moments_match_scenario_one() {
        let base: TargetModel<f64> = TargetModel::std_gaussian(2);
        let m = base.scale_family(0.01, 1).unwrap();
        let cov = m.known_cov_diag().unwrap();
        assert!((cov[0] - 1e-4).abs() < 1e-18);
        assert!((cov[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scale_family_rejects_bad_lambda() {
        let base: TargetModel<f64> = TargetModel::std_gaussian(1);
        assert!(base.clone().scale_family(0.0, 1).is_err());
        assert!(base.clone().scale_family(-1.0, 1).is_err());
        assert!(base.scale_family(1.0, 2).is_err());
    }

    #[test]
    fn skew_normal_moments() {
        let alpha = 4.0f64;
        let eta = 2.0f64;
        let m: TargetModel<f64> = TargetModel::skew_normal(vec![eta], alpha);
        let delta = alpha / (1.0 + alpha * alpha).sqrt();
        let mean = eta * delta * (2.0 / std::f64::consts::PI).sqrt();
        let var = eta * eta * (1.0 - 2.0 * delta * delta / std::f64::consts::PI);
        assert!((m.known_mean().unwrap()[0] - mean).abs() < 1e-12);
        assert!((m.known_cov_diag().unwrap()[0] - var).abs() < 1e-12);
    }

    #[test]
    fn skew_normal_deep_tail_finite() {
        let m: TargetModel<f64> = TargetModel::skew_normal(vec![1.0], 4.0);
        for x in [-500.0, -50.0, -3.0, 0.0, 3.0] {
            assert!(m.log_density(&[x]).is_finite());
            assert!(m.grad_log_density(&[x])[0].is_finite());
        }
    }

    #[test]
    fn iid_product_replicates_base() {
        let base: TargetModel<f64> = TargetModel::hyperbolic(vec![1.0], 0.1);
        let m = TargetModel::iid_product(base.clone(), 3);
        let x = [0.4, -1.0, 2.0];
        let want: f64 = x.iter().map(|xi| base.log_density(&[*xi])).sum();
        assert!((m.log_density(&x) - want).abs() < 1e-12);
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn poisson_dataset_shapes_and_determinism() {
        let (a, _) = generate_poisson_data(5.0, 1.0, 50, 5, 7);
        assert_eq!(a.n_groups(), 50);
        assert_eq!(a.n_observations(), 250);
        let (b, _) = generate_poisson_data(5.0, 1.0, 50, 5, 7);
        assert_eq!(a, b);
        let (c, _) = generate_poisson_data(5.0, 1.0, 50, 5, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn poisson_dataset_degenerate_prior_mean() {
        // sigma_eta = 0: every group rate is exp(mu*); check the empirical
        // mean against the exact mean within 3 standard errors.
        let mu_star = 1.2f64;
        let (data, _) = generate_poisson_data(mu_star, 0.0, 100, 100, 123);
        let rate = mu_star.exp();
        let n = data.n_observations() as f64;
        let mean =
            data.groups.iter().flatten().map(|y| *y as f64).sum::<f64>() / n;
        let se = (rate / n).sqrt();
        assert!(
            (mean - rate).abs() < 3.0 * se,
            "mean {mean} vs rate {rate} (se {se})"
        );
    }

    #[test]
    fn poisson_json_round_trip() {
        let (data, _) = generate_poisson_data(5.0, 1.0, 10, 5, 99);
        let json = data.to_json();
        let back = PoissonDataset::from_json(&json).unwrap();
        assert_eq!(data, back);
    }
}
