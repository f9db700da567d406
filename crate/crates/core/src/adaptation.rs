//! Robbins--Monro adaptation of the global proposal scale and a diagonal or
//! dense preconditioner.
//!
//! With learning rate `gamma_t = min(t^{-kappa}, 0.9)`, each step applies
//!
//! ```text
//! log sigma_t = log sigma_{t-1} + gamma_t (alpha_t - alpha*)
//! mu_t        = mu_{t-1} + gamma_t (x_t - mu_{t-1})
//! Sigma_t     = Sigma_{t-1} + gamma_t ((x_t - mu_t)(x_t - mu_t)^T - Sigma_{t-1})
//! ```
//!
//! In diagonal mode all off-diagonal terms of the covariance update are
//! dropped. The proposal scale handed to the kernel is
//! `sigma_t * Sigma_t^{1/2}`.
//!
//! The cap on the first learning rate keeps `gamma_1` strictly below one:
//! an uncapped first update replaces the whole covariance estimate with the
//! rank-one residual term (which the floor then truncates), and the chain
//! spends thousands of steps recovering from the erased `Sigma_0 = I`.
//! From `t = 2` on, `t^{-kappa} < 0.9` for every supported `kappa`, so the
//! cap only affects the first step.

use std::io::Write;
use std::path::Path;

use crate::proposals::{LowerTriangular, ProposalFamily, ProposalKernel};
use crate::scalar::{cast, Scalar};

/// Diagonal entries never drop below this, so constant coordinates cannot
/// collapse the proposal.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct AdaptationSettings<T: Scalar> {
    /// Learning-rate exponent, in (0.5, 1).
    pub kappa: T,
    /// Target mean acceptance probability.
    pub alpha_star: T,
    /// Keep only the diagonal of the covariance estimate.
    pub diagonal_only: bool,
    /// When false every update is a no-op (`gamma_t = 0`); the adaptive
    /// driver then reproduces the fixed-kernel chain bit for bit.
    pub enabled: bool,
}

impl<T: Scalar> AdaptationSettings<T> {
    pub fn diagonal(kappa: T, alpha_star: T) -> Self {
        AdaptationSettings {
            kappa,
            alpha_star,
            diagonal_only: true,
            enabled: true,
        }
    }

    pub fn frozen() -> Self {
        AdaptationSettings {
            kappa: cast(0.6),
            alpha_star: cast(0.4),
            diagonal_only: true,
            enabled: false,
        }
    }
}

#[derive(Clone, Debug)]
enum CovEstimate<T: Scalar> {
    Diagonal(Vec<T>),
    /// Row-major symmetric matrix.
    Dense(Vec<T>),
}

/// Running state of the adaptation recursion.
#[derive(Clone, Debug)]
pub struct AdaptationState<T: Scalar> {
    log_sigma: T,
    mu: Vec<T>,
    cov: CovEstimate<T>,
    t: u64,
    settings: AdaptationSettings<T>,
    dim: usize,
}

impl<T: Scalar> AdaptationState<T> {
    /// Start from `sigma_0`, `mu_0 = 0`, `Sigma_0 = I`.
    pub fn new(sigma0: T, dim: usize, settings: AdaptationSettings<T>) -> Self {
        assert!(sigma0 > T::zero());
        assert!(dim > 0);
        let cov = if settings.diagonal_only {
            CovEstimate::Diagonal(vec![T::one(); dim])
        } else {
            let mut m = vec![T::zero(); dim * dim];
            for i in 0..dim {
                m[i * dim + i] = T::one();
            }
            CovEstimate::Dense(m)
        };
        AdaptationState {
            log_sigma: sigma0.ln(),
            mu: vec![T::zero(); dim],
            cov,
            t: 0,
            settings,
            dim,
        }
    }

    pub fn settings(&self) -> &AdaptationSettings<T> {
        &self.settings
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn log_sigma(&self) -> T {
        self.log_sigma
    }

    pub fn sigma(&self) -> T {
        self.log_sigma.exp()
    }

    pub fn mean(&self) -> &[T] {
        &self.mu
    }

    pub fn cov_diag(&self) -> Vec<T> {
        match &self.cov {
            CovEstimate::Diagonal(d) => d.clone(),
            CovEstimate::Dense(m) => (0..self.dim).map(|i| m[i * self.dim + i]).collect(),
        }
    }

    /// Learning rate for the next update.
    pub fn next_gamma(&self) -> T {
        if self.settings.enabled {
            cast::<T>((self.t + 1) as f64)
                .powf(-self.settings.kappa)
                .min(cast(0.9))
        } else {
            T::zero()
        }
    }

    /// One Robbins--Monro update from the post-step state `x_t` and the
    /// realized acceptance probability.
    pub fn update(&mut self, x_t: &[T], accept_prob: T) {
        assert_eq!(x_t.len(), self.dim);
        debug_assert!(accept_prob >= T::zero() && accept_prob <= T::one());
        let gamma = self.next_gamma();
        self.t += 1;
        self.log_sigma += gamma * (accept_prob - self.settings.alpha_star);
        for (mu_i, x_i) in self.mu.iter_mut().zip(x_t) {
            *mu_i += gamma * (*x_i - *mu_i);
        }
        let floor = cast::<T>(SIGMA_FLOOR);
        match &mut self.cov {
            CovEstimate::Diagonal(diag) => {
                for i in 0..self.dim {
                    let r = x_t[i] - self.mu[i];
                    let cur = diag[i];
                    diag[i] = (cur + gamma * (r * r - cur)).max(floor);
                }
            }
            CovEstimate::Dense(m) => {
                let resid: Vec<T> = (0..self.dim).map(|i| x_t[i] - self.mu[i]).collect();
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        let idx = i * self.dim + j;
                        let cur = m[idx];
                        m[idx] = cur + gamma * (resid[i] * resid[j] - cur);
                    }
                }
                for i in 0..self.dim {
                    let idx = i * self.dim + i;
                    m[idx] = m[idx].max(floor);
                }
            }
        }
    }

    /// Instantiate the kernel this adaptation state currently prescribes:
    /// global scale `sigma_t`, local scales `sigma_t sqrt(Sigma_t,ii)` in
    /// diagonal mode, or the Cholesky factor of `Sigma_t` in dense mode.
    /// Families without per-coordinate scales only receive `sigma_t`.
    pub fn tuned_kernel(&self, base: &ProposalKernel<T>) -> ProposalKernel<T> {
        let k = base
            .clone()
            .with_sigma(self.sigma())
            .expect("adapted sigma positive");
        match &self.cov {
            CovEstimate::Diagonal(diag) if supports_local_scales(base.family()) => k
                .with_local_scales(diag.iter().map(|v| v.sqrt()).collect())
                .expect("positive floored scales"),
            CovEstimate::Dense(m) if supports_precond(base.family()) => {
                // Tiny ridge so the factorization exists even while the
                // estimate is still rank-deficient (e.g. right after t = 1).
                let mut ridged = m.clone();
                for i in 0..self.dim {
                    ridged[i * self.dim + i] += cast::<T>(SIGMA_FLOOR);
                }
                let chol = LowerTriangular::cholesky(&ridged, self.dim)
                    .expect("floored covariance is positive definite");
                k.with_precond_chol(chol).expect("kernel accepts precond")
            }
            _ => k,
        }
    }
}

fn supports_local_scales(family: ProposalFamily) -> bool {
    matches!(
        family,
        ProposalFamily::Rwm
            | ProposalFamily::Mala
            | ProposalFamily::Malta
            | ProposalFamily::MaltaC
            | ProposalFamily::Barker
            | ProposalFamily::GenericLb
    )
}

fn supports_precond(family: ProposalFamily) -> bool {
    matches!(
        family,
        ProposalFamily::Rwm | ProposalFamily::Mala | ProposalFamily::Barker
    )
}

/// Initial global scale and target acceptance rate for adaptive runs:
/// `sigma_0^2 = 2.4^2 / d` targeting 0.23 for the random walk,
/// `sigma_0^2 = 2.4^2 / d^{1/3}` targeting 0.57 for the Langevin family,
/// the same initial scale targeting 0.40 for the Barker family.
pub fn default_initialization<T: Scalar>(family: ProposalFamily, dim: usize) -> (T, T) {
    let d = dim as f64;
    let (sig2, astar) = match family {
        ProposalFamily::Rwm => (2.4 * 2.4 / d, 0.23),
        ProposalFamily::Mala | ProposalFamily::Malta | ProposalFamily::MaltaC => {
            (2.4 * 2.4 / d.cbrt(), 0.57)
        }
        ProposalFamily::Barker | ProposalFamily::BarkerGlobalFlip | ProposalFamily::GenericLb => {
            (2.4 * 2.4 / d.cbrt(), 0.40)
        }
        // The adaptive experiments in this crate tune only the Hamiltonian
        // step size; 0.651 is the canonical target for fixed-length HMC.
        ProposalFamily::Hmc => (2.4 * 2.4 / d.sqrt().sqrt(), 0.651),
    };
    (cast(sig2.sqrt()), cast(astar))
}

/// Per-step record of the tuning parameters, for convergence plots.
#[derive(Clone, Debug)]
pub struct AdaptationTrace<T: Scalar> {
    pub dim: usize,
    pub log_sigma: Vec<T>,
    /// Row-major `n_steps x dim` diagonal of `Sigma_t`.
    pub cov_diag: Vec<T>,
}

impl<T: Scalar> AdaptationTrace<T> {
    pub fn with_capacity(dim: usize, n_steps: usize) -> Self {
        AdaptationTrace {
            dim,
            log_sigma: Vec::with_capacity(n_steps),
            cov_diag: Vec::with_capacity(n_steps * dim),
        }
    }

    pub fn record(&mut self, state: &AdaptationState<T>) {
        self.log_sigma.push(state.log_sigma());
        self.cov_diag.extend(state.cov_diag());
    }

    pub fn len(&self) -> usize {
        self.log_sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_sigma.is_empty()
    }

    pub fn cov_diag_row(&self, t: usize) -> &[T] {
        &self.cov_diag[t * self.dim..(t + 1) * self.dim]
    }

    /// CSV with columns `t, log_sigma, sigma_1..sigma_d` (diagonal of
    /// `Sigma_t`).
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(w, "t,log_sigma")?;
        for i in 1..=self.dim {
            write!(w, ",sigma_{i}")?;
        }
        writeln!(w)?;
        for t in 0..self.len() {
            write!(w, "{},{}", t + 1, self.log_sigma[t])?;
            for v in self.cov_diag_row(t) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
