//! Candidate-generation mechanisms and their log proposal densities.
//!
//! Every family produces a [`ProposalOutcome`] carrying the proposed point
//! and the forward log proposal density; the reverse density is supplied to
//! the sampler once the gradient at the proposal is known. All Hastings
//! terms are computed in log space with the two-branch `log1p(exp)` form, so
//! acceptance stays finite for gradients up to overflow scale.

mod balancing;

pub use balancing::BalancingFn;

use rand::Rng;
use thiserror::Error;

use crate::math::{integrate, log1p_exp, log_normal_pdf, logistic, normal_cdf};
use crate::scalar::{cast, positive, Scalar};
use crate::targets::TargetModel;

#[derive(Debug, Error)]
pub enum ProposalError {
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("leapfrog step count must be >= 1")]
    BadLeapfrogSteps,
    #[error("{0} does not accept {1}")]
    FieldNotAllowed(&'static str, &'static str),
    #[error("local_scales and precond_chol are mutually exclusive")]
    ScaleAndPrecond,
    #[error("local scales must be positive")]
    BadLocalScales,
    #[error("invalid balancing function: {0}")]
    InvalidBalancing(String),
    #[error("rejection sampling requires a bounded balancing function; {0} is unbounded")]
    UnboundedBalancing(String),
    #[error("matrix is not lower-triangular with positive diagonal")]
    NotLowerTriangular,
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProposalFamily {
    Rwm,
    Mala,
    Barker,
    BarkerGlobalFlip,
    Malta,
    MaltaC,
    Hmc,
    GenericLb,
}

impl ProposalFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ProposalFamily::Rwm => "rwm",
            ProposalFamily::Mala => "mala",
            ProposalFamily::Barker => "barker",
            ProposalFamily::BarkerGlobalFlip => "barker_global_flip",
            ProposalFamily::Malta => "malta",
            ProposalFamily::MaltaC => "maltac",
            ProposalFamily::Hmc => "hmc",
            ProposalFamily::GenericLb => "generic_lb",
        }
    }

    /// Whether the proposal mechanism consumes the target gradient.
    pub fn uses_gradient(&self) -> bool {
        !matches!(self, ProposalFamily::Rwm)
    }
}

/// Dense lower-triangular matrix with positive diagonal, used as the
/// Cholesky factor of a proposal covariance. The proposal applies it as
/// `displacement = C z`, so the displacement covariance is `C C^T`.
#[derive(Clone, Debug)]
pub struct LowerTriangular<T: Scalar> {
    dim: usize,
    rows: Vec<T>, // row-major dim x dim, upper part zero
}

impl<T: Scalar> LowerTriangular<T> {
    pub fn identity(dim: usize) -> Self {
        let mut rows = vec![T::zero(); dim * dim];
        for i in 0..dim {
            rows[i * dim + i] = T::one();
        }
        LowerTriangular { dim, rows }
    }

    pub fn from_rows(data: Vec<Vec<T>>) -> Result<Self, ProposalError> {
        let dim = data.len();
        let mut rows = vec![T::zero(); dim * dim];
        for (i, r) in data.iter().enumerate() {
            if r.len() != dim {
                return Err(ProposalError::NotLowerTriangular);
            }
            for (j, v) in r.iter().enumerate() {
                if j > i && *v != T::zero() {
                    return Err(ProposalError::NotLowerTriangular);
                }
                if j == i && !positive(*v) {
                    return Err(ProposalError::NotLowerTriangular);
                }
                rows[i * dim + j] = *v;
            }
        }
        Ok(LowerTriangular { dim, rows })
    }

    /// Cholesky factor of a symmetric positive-definite matrix given in
    /// row-major order.
    pub fn cholesky(cov: &[T], dim: usize) -> Result<Self, ProposalError> {
        assert_eq!(cov.len(), dim * dim);
        let mut l = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let mut s = cov[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                if i == j {
                    if !positive(s) {
                        return Err(ProposalError::NotPositiveDefinite);
                    }
                    l[i * dim + i] = s.sqrt();
                } else {
                    l[i * dim + j] = s / l[j * dim + j];
                }
            }
        }
        Ok(LowerTriangular { dim, rows: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.rows[i * self.dim + j]
    }

    /// `C v`
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                (0..=i)
                    .map(|j| self.rows[i * self.dim + j] * v[j])
                    .sum::<T>()
            })
            .collect()
    }

    /// `C^T v`
    pub fn tr_mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                (i..self.dim)
                    .map(|j| self.rows[j * self.dim + i] * v[j])
                    .sum::<T>()
            })
            .collect()
    }

    /// Solve `C z = w` by forward substitution.
    pub fn solve(&self, w: &[T]) -> Vec<T> {
        let mut z = vec![T::zero(); self.dim];
        for i in 0..self.dim {
            let mut s = w[i];
            for (j, zj) in z.iter().enumerate().take(i) {
                s -= self.rows[i * self.dim + j] * *zj;
            }
            z[i] = s / self.rows[i * self.dim + i];
        }
        z
    }

    pub fn log_det(&self) -> T {
        (0..self.dim)
            .map(|i| self.rows[i * self.dim + i].ln())
            .sum()
    }
}

/// A named proposal family with its tuning parameters.
#[derive(Clone, Debug)]
pub struct ProposalKernel<T: Scalar> {
    family: ProposalFamily,
    sigma: T,
    local_scales: Option<Vec<T>>,
    precond_chol: Option<LowerTriangular<T>>,
    hmc_steps: Option<usize>,
    malta_delta: Option<T>,
    balancing: Option<BalancingFn<T>>,
}

/// Default gradient-truncation radius for the norm-truncated Langevin
/// variant, overridable by config.
pub fn default_malta_delta<T: Scalar>() -> T {
    cast(1000.0)
}

impl<T: Scalar> ProposalKernel<T> {
    fn base(family: ProposalFamily, sigma: T) -> Result<Self, ProposalError> {
        if !positive(sigma) {
            return Err(ProposalError::NonPositiveSigma(
                sigma.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(ProposalKernel {
            family,
            sigma,
            local_scales: None,
            precond_chol: None,
            hmc_steps: None,
            malta_delta: None,
            balancing: None,
        })
    }

    pub fn rwm(sigma: T) -> Result<Self, ProposalError> {
        Self::base(ProposalFamily::Rwm, sigma)
    }

    pub fn mala(sigma: T) -> Result<Self, ProposalError> {
        Self::base(ProposalFamily::Mala, sigma)
    }

    pub fn barker(sigma: T) -> Result<Self, ProposalError> {
        Self::base(ProposalFamily::Barker, sigma)
    }

    pub fn barker_global_flip(sigma: T) -> Result<Self, ProposalError> {
        Self::base(ProposalFamily::BarkerGlobalFlip, sigma)
    }

    pub fn malta(sigma: T, delta: Option<T>) -> Result<Self, ProposalError> {
        let delta = delta.unwrap_or_else(default_malta_delta);
        if !positive(delta) {
            return Err(ProposalError::NonPositiveSigma(
                delta.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let mut k = Self::base(ProposalFamily::Malta, sigma)?;
        k.malta_delta = Some(delta);
        Ok(k)
    }

    pub fn maltac(sigma: T) -> Result<Self, ProposalError> {
        Self::base(ProposalFamily::MaltaC, sigma)
    }

    pub fn hmc(sigma: T, leapfrog_steps: usize) -> Result<Self, ProposalError> {
        if leapfrog_steps == 0 {
            return Err(ProposalError::BadLeapfrogSteps);
        }
        let mut k = Self::base(ProposalFamily::Hmc, sigma)?;
        k.hmc_steps = Some(leapfrog_steps);
        Ok(k)
    }

    pub fn generic_lb(sigma: T, balancing: BalancingFn<T>) -> Result<Self, ProposalError> {
        if !balancing.is_bounded() {
            return Err(ProposalError::UnboundedBalancing(
                balancing.name().to_string(),
            ));
        }
        let mut k = Self::base(ProposalFamily::GenericLb, sigma)?;
        k.balancing = Some(balancing);
        Ok(k)
    }

    /// Per-coordinate scales (supplement's diagonal variant). Mutually
    /// exclusive with a dense preconditioner.
    pub fn with_local_scales(mut self, scales: Vec<T>) -> Result<Self, ProposalError> {
        match self.family {
            ProposalFamily::Rwm
            | ProposalFamily::Mala
            | ProposalFamily::Malta
            | ProposalFamily::MaltaC
            | ProposalFamily::Barker
            | ProposalFamily::GenericLb => {}
            f => return Err(ProposalError::FieldNotAllowed(f.name(), "local_scales")),
        }
        if self.precond_chol.is_some() {
            return Err(ProposalError::ScaleAndPrecond);
        }
        if scales.is_empty() || !scales.iter().all(|s| *s > T::zero()) {
            return Err(ProposalError::BadLocalScales);
        }
        self.local_scales = Some(scales);
        Ok(self)
    }

    /// Dense preconditioner: a lower-triangular Cholesky factor `C`, applied
    /// as `displacement = sigma * C z` so the proposal covariance is
    /// `sigma^2 C C^T`.
    pub fn with_precond_chol(mut self, chol: LowerTriangular<T>) -> Result<Self, ProposalError> {
        match self.family {
            ProposalFamily::Rwm | ProposalFamily::Mala | ProposalFamily::Barker => {}
            f => return Err(ProposalError::FieldNotAllowed(f.name(), "precond_chol")),
        }
        if self.local_scales.is_some() {
            return Err(ProposalError::ScaleAndPrecond);
        }
        self.precond_chol = Some(chol);
        Ok(self)
    }

    pub fn with_sigma(mut self, sigma: T) -> Result<Self, ProposalError> {
        if !positive(sigma) {
            return Err(ProposalError::NonPositiveSigma(
                sigma.to_f64().unwrap_or(f64::NAN),
            ));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn family(&self) -> ProposalFamily {
        self.family
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn leapfrog_steps(&self) -> Option<usize> {
        self.hmc_steps
    }

    pub fn balancing(&self) -> Option<&BalancingFn<T>> {
        self.balancing.as_ref()
    }

    /// Gradient evaluations one sampler step with this kernel costs.
    pub fn grad_evals_per_step(&self) -> u64 {
        match self.family {
            ProposalFamily::Rwm => 0,
            ProposalFamily::Hmc => self.hmc_steps.expect("hmc kernel has steps") as u64 + 1,
            _ => 1,
        }
    }

    // ---- effective scale helpers ----------------------------------------

    fn coord_sigma(&self, i: usize) -> T {
        match &self.local_scales {
            Some(s) => self.sigma * s[i],
            None => self.sigma,
        }
    }

    /// `w = M z` with `M = sigma * (I | diag(s) | C)`.
    fn latent_to_disp(&self, z: &[T]) -> Vec<T> {
        match &self.precond_chol {
            Some(c) => c.mul_vec(z).iter().map(|w| *w * self.sigma).collect(),
            None => z
                .iter()
                .enumerate()
                .map(|(i, zi)| *zi * self.coord_sigma(i))
                .collect(),
        }
    }

    /// `z = M^{-1} w`.
    fn disp_to_latent(&self, w: &[T]) -> Vec<T> {
        match &self.precond_chol {
            Some(c) => {
                let scaled: Vec<T> = w.iter().map(|wi| *wi / self.sigma).collect();
                c.solve(&scaled)
            }
            None => w
                .iter()
                .enumerate()
                .map(|(i, wi)| *wi / self.coord_sigma(i))
                .collect(),
        }
    }

    /// `c = M^T grad`: the per-latent-coordinate directional gradients.
    fn directional_grads(&self, grad: &[T]) -> Vec<T> {
        match &self.precond_chol {
            Some(c) => c
                .tr_mul_vec(grad)
                .iter()
                .map(|g| *g * self.sigma)
                .collect(),
            None => grad
                .iter()
                .enumerate()
                .map(|(i, gi)| *gi * self.coord_sigma(i))
                .collect(),
        }
    }

    /// `S v = M M^T v` (the effective proposal covariance applied to `v`).
    fn apply_cov(&self, v: &[T]) -> Vec<T> {
        match &self.precond_chol {
            Some(c) => {
                let s2 = self.sigma * self.sigma;
                c.mul_vec(&c.tr_mul_vec(v))
                    .iter()
                    .map(|x| *x * s2)
                    .collect()
            }
            None => v
                .iter()
                .enumerate()
                .map(|(i, vi)| {
                    let s = self.coord_sigma(i);
                    *vi * s * s
                })
                .collect(),
        }
    }

    fn log_det_scale(&self, d: usize) -> T {
        let base = cast::<T>(d as f64) * self.sigma.ln();
        match (&self.precond_chol, &self.local_scales) {
            (Some(c), _) => base + c.log_det(),
            (None, Some(s)) => base + s.iter().map(|si| si.ln()).sum::<T>(),
            (None, None) => base,
        }
    }

    fn drift_grad(&self, grad: &[T]) -> Vec<T> {
        match self.family {
            ProposalFamily::Malta => {
                malta_grad(grad, self.malta_delta.expect("malta kernel has delta"))
            }
            ProposalFamily::MaltaC => grad
                .iter()
                .enumerate()
                .map(|(i, gi)| {
                    let s = self.coord_sigma(i);
                    *gi / (T::one() + s * s * gi.abs())
                })
                .collect(),
            _ => grad.to_vec(),
        }
    }

    // ---- proposing -------------------------------------------------------

    /// Draw a proposal from the current point `x` with cached gradient
    /// `grad` (ignored by the random walk). `target` is only consulted by
    /// the Hamiltonian family, which integrates through it.
    pub fn propose<R: Rng + ?Sized>(
        &self,
        x: &[T],
        grad: &[T],
        target: &TargetModel<T>,
        rng: &mut R,
    ) -> ProposalOutcome<T> {
        if self.family.uses_gradient() {
            assert_eq!(grad.len(), x.len(), "gradient/position length mismatch");
        }
        match self.family {
            ProposalFamily::Rwm => self.propose_rwm(x, rng),
            ProposalFamily::Mala | ProposalFamily::Malta | ProposalFamily::MaltaC => {
                self.propose_mala_type(x, grad, rng)
            }
            ProposalFamily::Barker => self.propose_barker(x, grad, rng),
            ProposalFamily::BarkerGlobalFlip => self.propose_global_flip(x, grad, rng),
            ProposalFamily::Hmc => self.propose_hmc(x, target, rng),
            ProposalFamily::GenericLb => self.propose_generic_lb(x, grad, rng),
        }
    }

    fn propose_rwm<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R) -> ProposalOutcome<T> {
        let d = x.len();
        let z: Vec<T> = (0..d).map(|_| T::std_normal(rng)).collect();
        let w = self.latent_to_disp(&z);
        let y: Vec<T> = x.iter().zip(&w).map(|(xi, wi)| *xi + *wi).collect();
        let log_q = self.log_gaussian_latent(&z, d);
        ProposalOutcome {
            y,
            log_q_fwd: log_q,
            divergent: false,
            aux: ProposalAux::None,
        }
    }

    fn log_gaussian_latent(&self, z: &[T], d: usize) -> T {
        let half = cast::<T>(0.5);
        let sq: T = z.iter().map(|zi| *zi * *zi).sum();
        -half * sq - half * cast::<T>(d as f64) * T::TAU().ln() - self.log_det_scale(d)
    }

    fn propose_mala_type<R: Rng + ?Sized>(
        &self,
        x: &[T],
        grad: &[T],
        rng: &mut R,
    ) -> ProposalOutcome<T> {
        let d = x.len();
        let half = cast::<T>(0.5);
        let drift = self.apply_cov(&self.drift_grad(grad));
        let z: Vec<T> = (0..d).map(|_| T::std_normal(rng)).collect();
        let w = self.latent_to_disp(&z);
        let y: Vec<T> = (0..d).map(|i| x[i] + half * drift[i] + w[i]).collect();
        if !y.iter().all(|v| v.is_finite()) {
            return ProposalOutcome::divergent(y);
        }
        let log_q = self.log_gaussian_latent(&z, d);
        ProposalOutcome {
            y,
            log_q_fwd: log_q,
            divergent: false,
            aux: ProposalAux::None,
        }
    }

    fn propose_barker<R: Rng + ?Sized>(
        &self,
        x: &[T],
        grad: &[T],
        rng: &mut R,
    ) -> ProposalOutcome<T> {
        let d = x.len();
        let c = self.directional_grads(grad);
        let mut latent = Vec::with_capacity(d);
        let mut flips = Vec::with_capacity(d);
        for ci in c.iter().take(d) {
            let z = T::std_normal(rng);
            let p = logistic(z * *ci);
            let keep = T::unit_uniform(rng) < p;
            latent.push(if keep { z } else { -z });
            flips.push(!keep);
        }
        let w = self.latent_to_disp(&latent);
        let y: Vec<T> = x.iter().zip(&w).map(|(xi, wi)| *xi + *wi).collect();
        let log_q = self.log_q_barker_latent(&latent, &c, d);
        ProposalOutcome {
            y,
            log_q_fwd: log_q,
            divergent: false,
            aux: ProposalAux::Barker { latent, flips },
        }
    }

    /// Product of the skew-symmetric per-coordinate densities, expressed in
    /// latent coordinates: `prod_i 2 phi(z_i) sigmoid(z_i c_i) / |det M|`.
    fn log_q_barker_latent(&self, z: &[T], c: &[T], d: usize) -> T {
        let mut acc = self.log_gaussian_latent(z, d) + cast::<T>(d as f64) * cast::<T>(2.0).ln();
        for i in 0..d {
            acc -= log1p_exp(-z[i] * c[i]);
        }
        acc
    }

    fn propose_global_flip<R: Rng + ?Sized>(
        &self,
        x: &[T],
        grad: &[T],
        rng: &mut R,
    ) -> ProposalOutcome<T> {
        let d = x.len();
        let w: Vec<T> = (0..d).map(|_| T::std_normal(rng) * self.sigma).collect();
        let dot: T = w.iter().zip(grad).map(|(wi, gi)| *wi * *gi).sum();
        let p = logistic(dot);
        let keep = T::unit_uniform(rng) < p;
        let y: Vec<T> = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| if keep { *xi + *wi } else { *xi - *wi })
            .collect();
        let signed_dot = if keep { dot } else { -dot };
        let log_q = cast::<T>(2.0).ln()
            + w.iter()
                .map(|wi| log_normal_pdf(*wi, self.sigma))
                .sum::<T>()
            - log1p_exp(-signed_dot);
        ProposalOutcome {
            y,
            log_q_fwd: log_q,
            divergent: false,
            aux: ProposalAux::GlobalFlip {
                magnitude: w,
                flip: !keep,
            },
        }
    }

    fn propose_hmc<R: Rng + ?Sized>(
        &self,
        x0: &[T],
        target: &TargetModel<T>,
        rng: &mut R,
    ) -> ProposalOutcome<T> {
        let d = x0.len();
        let steps = self.hmc_steps.expect("hmc kernel has steps");
        let eps = self.sigma;
        let half = cast::<T>(0.5);
        let mut x = x0.to_vec();
        let xi0: Vec<T> = (0..d).map(|_| T::std_normal(rng)).collect();
        let mut xi = xi0.clone();

        let mut grad = target.grad_log_density(&x);
        let mut grad_evals = 1u64;
        for i in 0..d {
            xi[i] += half * eps * grad[i];
        }
        let mut log_pi_y = T::nan();
        for step in 1..=steps {
            for i in 0..d {
                x[i] += eps * xi[i];
            }
            if !x.iter().all(|v| v.is_finite()) {
                return ProposalOutcome::divergent_with_evals(x, grad_evals);
            }
            if step < steps {
                grad = target.grad_log_density(&x);
            } else {
                let (lp, g) = target.log_density_and_grad(&x);
                log_pi_y = lp;
                grad = g;
            }
            grad_evals += 1;
            if !grad.iter().all(|v| v.is_finite()) {
                return ProposalOutcome::divergent_with_evals(x, grad_evals);
            }
            let weight = if step < steps { eps } else { half * eps };
            for i in 0..d {
                xi[i] += weight * grad[i];
            }
        }
        if !xi.iter().all(|v| v.is_finite()) {
            return ProposalOutcome::divergent_with_evals(x, grad_evals);
        }
        ProposalOutcome {
            y: x,
            log_q_fwd: -half_sq_norm(&xi0),
            divergent: false,
            aux: ProposalAux::Hmc {
                xi0,
                xi_l: xi,
                log_pi_y,
                grad_y: grad,
                grad_evals,
            },
        }
    }

    fn propose_generic_lb<R: Rng + ?Sized>(
        &self,
        x: &[T],
        grad: &[T],
        rng: &mut R,
    ) -> ProposalOutcome<T> {
        let d = x.len();
        let g = self.balancing.as_ref().expect("generic_lb has balancing");
        let log_sup = g.sup().ln();
        let mut y = Vec::with_capacity(d);
        let mut trials = Vec::with_capacity(d);
        let mut log_q = T::zero();
        for i in 0..d {
            let sigma_i = self.coord_sigma(i);
            // Envelope sampler: accept w ~ mu_sigma with probability
            // g(e^{w grad_i}) / M; valid because the target density is
            // bounded by (M / Z_i) mu_sigma.
            let mut w;
            let mut tried = 0u32;
            loop {
                w = T::std_normal(rng) * sigma_i;
                tried += 1;
                let log_accept = g.log_eval_exp(w * grad[i]) - log_sup;
                if T::unit_uniform(rng).ln() < log_accept {
                    break;
                }
                assert!(
                    tried < 1_000_000,
                    "generic_lb envelope failed to accept; invalid balancing function?"
                );
            }
            trials.push(tried);
            let z = lb_normalizer(g, grad[i], sigma_i);
            log_q += g.log_eval_exp(w * grad[i]) + log_normal_pdf(w, sigma_i) - z.ln();
            y.push(x[i] + w);
        }
        ProposalOutcome {
            y,
            log_q_fwd: log_q,
            divergent: false,
            aux: ProposalAux::GenericLb { trials },
        }
    }

    // ---- densities --------------------------------------------------------

    /// Log proposal density `ln q(from, to)` given the gradient at `from`.
    /// `None` for the Hamiltonian family, whose marginal proposal density is
    /// intractable.
    pub fn log_q(&self, from: &[T], grad_from: &[T], to: &[T]) -> Option<T> {
        let d = from.len();
        let w: Vec<T> = (0..d).map(|i| to[i] - from[i]).collect();
        match self.family {
            ProposalFamily::Hmc => None,
            ProposalFamily::Rwm => {
                let z = self.disp_to_latent(&w);
                Some(self.log_gaussian_latent(&z, d))
            }
            ProposalFamily::Mala | ProposalFamily::Malta | ProposalFamily::MaltaC => {
                let half = cast::<T>(0.5);
                let drift = self.apply_cov(&self.drift_grad(grad_from));
                let resid: Vec<T> = (0..d).map(|i| w[i] - half * drift[i]).collect();
                let z = self.disp_to_latent(&resid);
                Some(self.log_gaussian_latent(&z, d))
            }
            ProposalFamily::Barker => {
                let z = self.disp_to_latent(&w);
                let c = self.directional_grads(grad_from);
                Some(self.log_q_barker_latent(&z, &c, d))
            }
            ProposalFamily::BarkerGlobalFlip => {
                let dot: T = w.iter().zip(grad_from).map(|(wi, gi)| *wi * *gi).sum();
                Some(
                    cast::<T>(2.0).ln()
                        + w.iter()
                            .map(|wi| log_normal_pdf(*wi, self.sigma))
                            .sum::<T>()
                        - log1p_exp(-dot),
                )
            }
            ProposalFamily::GenericLb => {
                let g = self.balancing.as_ref().expect("generic_lb has balancing");
                let mut acc = T::zero();
                for i in 0..d {
                    let sigma_i = self.coord_sigma(i);
                    let z = lb_normalizer(g, grad_from[i], sigma_i);
                    acc += g.log_eval_exp(w[i] * grad_from[i]) + log_normal_pdf(w[i], sigma_i)
                        - z.ln();
                }
                Some(acc)
            }
        }
    }

    /// Log reverse proposal density `ln q(y, x)`, given the gradient at the
    /// proposal `y` and the outcome's auxiliary record.
    pub fn log_q_rev(&self, x: &[T], y: &[T], grad_y: &[T], aux: &ProposalAux<T>) -> T {
        match (self.family, aux) {
            (ProposalFamily::Hmc, ProposalAux::Hmc { xi_l, .. }) => -half_sq_norm(xi_l),
            (ProposalFamily::Hmc, _) => panic!("hmc reverse density requires hmc aux record"),
            _ => self
                .log_q(y, grad_y, x)
                .expect("non-hmc families have tractable densities"),
        }
    }
}

/// A proposed move plus the log-density terms the accept step needs.
#[derive(Clone, Debug)]
pub struct ProposalOutcome<T: Scalar> {
    pub y: Vec<T>,
    pub log_q_fwd: T,
    pub divergent: bool,
    pub aux: ProposalAux<T>,
}

impl<T: Scalar> ProposalOutcome<T> {
    fn divergent(y: Vec<T>) -> Self {
        ProposalOutcome {
            y,
            log_q_fwd: T::nan(),
            divergent: true,
            aux: ProposalAux::None,
        }
    }

    fn divergent_with_evals(y: Vec<T>, grad_evals: u64) -> Self {
        ProposalOutcome {
            y,
            log_q_fwd: T::nan(),
            divergent: true,
            aux: ProposalAux::Hmc {
                xi0: Vec::new(),
                xi_l: Vec::new(),
                log_pi_y: T::nan(),
                grad_y: Vec::new(),
                grad_evals,
            },
        }
    }

    /// Gradient evaluations performed inside `propose` itself (zero except
    /// for the Hamiltonian family).
    pub fn internal_grad_evals(&self) -> u64 {
        match &self.aux {
            ProposalAux::Hmc { grad_evals, .. } => *grad_evals,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ProposalAux<T: Scalar> {
    None,
    /// Pre-flip latent draws and which coordinates were flipped.
    Barker { latent: Vec<T>, flips: Vec<bool> },
    GlobalFlip { magnitude: Vec<T>, flip: bool },
    /// Envelope-trial counts per coordinate of the rejection sampler.
    GenericLb { trials: Vec<u32> },
    Hmc {
        /// Initial and final momenta of the leapfrog trajectory.
        xi0: Vec<T>,
        xi_l: Vec<T>,
        log_pi_y: T,
        grad_y: Vec<T>,
        grad_evals: u64,
    },
}

/// `||v||^2 / 2`
fn half_sq_norm<T: Scalar>(v: &[T]) -> T {
    cast::<T>(0.5) * v.iter().map(|x| *x * *x).sum::<T>()
}

/// One draw of the scalar Barker proposal.
#[derive(Clone, Copy, Debug)]
pub struct Barker1dDraw<T: Scalar> {
    pub y: T,
    /// The magnitude draw `z ~ mu_sigma` before the directional flip.
    pub z: T,
    pub flipped: bool,
    /// Log proposal density of `y`.
    pub log_q: T,
}

/// Scalar Barker proposal: draw `z ~ mu_sigma`, keep its sign with
/// probability `1 / (1 + e^{-z grad})`, flip it otherwise.
pub fn barker_propose_1d<T: Scalar, R: Rng + ?Sized>(
    x: T,
    grad: T,
    sigma: T,
    rng: &mut R,
) -> Barker1dDraw<T> {
    let z = T::std_normal(rng) * sigma;
    let p = logistic(z * grad);
    let keep = T::unit_uniform(rng) < p;
    let w = if keep { z } else { -z };
    Barker1dDraw {
        y: x + w,
        z,
        flipped: !keep,
        log_q: barker_log_density_1d(w, grad, sigma),
    }
}

/// Log-density of the scalar Barker proposal displacement `w`:
/// `ln [ 2 mu_sigma(w) / (1 + e^{-grad w}) ]`.
pub fn barker_log_density_1d<T: Scalar>(w: T, grad: T, sigma: T) -> T {
    cast::<T>(2.0).ln() + log_normal_pdf(w, sigma) - log1p_exp(-grad * w)
}

/// Log Metropolis--Hastings acceptance for the coordinatewise Barker
/// proposal, computed directly from its closed form:
/// `min(0, log pi(y) - log pi(x) + sum_i [ln(1+e^{(x_i-y_i) d_i log pi(x)})
/// - ln(1+e^{(y_i-x_i) d_i log pi(y)})])`.
pub fn barker_log_accept<T: Scalar>(
    log_pi_x: T,
    log_pi_y: T,
    x: &[T],
    y: &[T],
    grad_x: &[T],
    grad_y: &[T],
) -> T {
    let mut acc = log_pi_y - log_pi_x;
    for i in 0..x.len() {
        let w = y[i] - x[i];
        acc += log1p_exp(-w * grad_x[i]) - log1p_exp(w * grad_y[i]);
    }
    acc.min(T::zero())
}

/// Norm truncation of the drift gradient: rescale so the norm never exceeds
/// `delta`.
pub fn malta_grad<T: Scalar>(grad: &[T], delta: T) -> Vec<T> {
    let norm = grad.iter().map(|g| *g * *g).sum::<T>().sqrt();
    if norm <= delta {
        grad.to_vec()
    } else {
        let f = delta / norm;
        grad.iter().map(|g| *g * f).collect()
    }
}

/// Component-wise taming: `G_i = g_i / (1 + sigma^2 |g_i|)`, which saturates
/// at `sigma^{-2}`.
pub fn maltac_grad<T: Scalar>(grad: &[T], sigma: T) -> Vec<T> {
    let s2 = sigma * sigma;
    grad.iter()
        .map(|g| *g / (T::one() + s2 * g.abs()))
        .collect()
}

/// Normalizer `Z = int g(e^{w grad}) mu_sigma(w) dw` of a first-order
/// locally-balanced proposal coordinate, by adaptive quadrature over
/// `(-8 sigma, 8 sigma)` plus a Gaussian tail correction evaluated at the
/// endpoints (the integrand is monotone in `w grad` there).
pub fn lb_normalizer<T: Scalar>(g: &BalancingFn<T>, grad: T, sigma: T) -> T {
    let lo = cast::<T>(-8.0) * sigma;
    let hi = cast::<T>(8.0) * sigma;
    let f = |w: T| g.log_eval_exp(w * grad).exp() * log_normal_pdf(w, sigma).exp();
    let body = integrate(&f, lo, hi, cast::<T>(1e-10));
    let tail_mass = normal_cdf(cast::<T>(-8.0));
    let cap = cast::<T>(700.0);
    let tail = tail_mass
        * (g.log_eval_exp(hi * grad).min(cap).exp() + g.log_eval_exp(lo * grad).min(cap).exp());
    body + tail
}
