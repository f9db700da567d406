//! Exact spectral gaps and conductances of one-dimensional samplers via
//! grid discretization.
//!
//! The transition matrix is built from the kernel's proposal density with
//! min-symmetrization, which makes the chain reversible with respect to the
//! grid-normalized target by construction. The gap is one minus the second
//! largest eigenvalue of the similarity-symmetrized matrix.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::proposals::ProposalKernel;
use crate::scalar::{cast, Scalar};
use crate::targets::TargetModel;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("row {row} sums to {sum}, off by more than 1e-12")]
    RowSum { row: usize, sum: f64 },
    #[error("reversibility residual {residual} at ({i},{j}) exceeds 1e-10")]
    NotReversible { i: usize, j: usize, residual: f64 },
    #[error("grid must have at least two points")]
    TooSmall,
}

/// A reversible Markov chain on a uniform grid.
#[derive(Clone, Debug)]
pub struct GridChain<T: Scalar> {
    points: Vec<T>,
    pi_hat: Vec<T>,
    /// Row-major row-stochastic transition matrix.
    p: Vec<T>,
}

impl<T: Scalar> GridChain<T> {
    /// Assemble from parts and check the invariants.
    pub fn from_parts(points: Vec<T>, pi_hat: Vec<T>, p: Vec<T>) -> Result<Self, GapError> {
        let chain = GridChain { points, pi_hat, p };
        chain.validate()?;
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn stationary(&self) -> &[T] {
        &self.pi_hat
    }

    pub fn transition(&self, i: usize, j: usize) -> T {
        self.p[i * self.n() + j]
    }

    pub fn validate(&self) -> Result<(), GapError> {
        let n = self.n();
        if n < 2 {
            return Err(GapError::TooSmall);
        }
        for i in 0..n {
            let sum: T = (0..n).map(|j| self.transition(i, j)).sum();
            let err = (sum - T::one()).abs().to_f64().unwrap();
            if err > 1e-12 {
                return Err(GapError::RowSum {
                    row: i,
                    sum: sum.to_f64().unwrap(),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let flow_ij = self.pi_hat[i] * self.transition(i, j);
                let flow_ji = self.pi_hat[j] * self.transition(j, i);
                let residual = (flow_ij - flow_ji).abs().to_f64().unwrap();
                if residual > 1e-10 {
                    return Err(GapError::NotReversible { i, j, residual });
                }
            }
        }
        Ok(())
    }

    /// Right spectral gap: `1 - lambda_2` of the pi-symmetrized matrix
    /// `D^{1/2} P D^{-1/2}`. The eigensolve runs in f64 regardless of the
    /// working scalar.
    pub fn spectral_gap(&self) -> T {
        let n = self.n();
        let pi: Vec<f64> = self.pi_hat.iter().map(|v| v.to_f64().unwrap()).collect();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let val =
                    self.transition(i, j).to_f64().unwrap() * (pi[i] / pi[j]).sqrt();
                s[(i, j)] = val;
            }
        }
        // Kill the residual asymmetry so the symmetric eigensolver is exact.
        let sym = (&s + s.transpose()) * 0.5;
        let mut eigs: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        debug_assert!(
            (eigs[0] - 1.0).abs() < 1e-8,
            "leading eigenvalue {} should be 1",
            eigs[0]
        );
        cast((1.0 - eigs[1]).max(0.0))
    }

    /// Conductance of the index set `K`:
    /// `Phi(K) = sum_{i in K} pi_i P(i, K^c) / pi(K)`.
    pub fn conductance(&self, k_set: &[usize]) -> T {
        let n = self.n();
        let mut in_k = vec![false; n];
        for &i in k_set {
            in_k[i] = true;
        }
        let mut escape = T::zero();
        let mut mass = T::zero();
        for i in k_set {
            mass += self.pi_hat[*i];
            let out: T = (0..n)
                .filter(|j| !in_k[*j])
                .map(|j| self.transition(*i, j))
                .sum();
            escape += self.pi_hat[*i] * out;
        }
        escape / mass
    }

    /// Indices of the right half-line `x > threshold`.
    pub fn right_set(&self, threshold: T) -> Vec<usize> {
        (0..self.n())
            .filter(|i| self.points[*i] > threshold)
            .collect()
    }
}

/// Discretize a Metropolis--Hastings sampler on a one-dimensional target
/// over the midpoint grid of `n` cells on `[-l, l]`:
/// `P_ij = min(pi_i q_ij, pi_j q_ji) dx / pi_i` off the diagonal, with the
/// diagonal absorbing the remainder.
pub fn build_grid_chain<T: Scalar>(
    target: &TargetModel<T>,
    kernel: &ProposalKernel<T>,
    n: usize,
    l: T,
) -> GridChain<T> {
    assert_eq!(target.dim(), 1, "grid chains are one-dimensional");
    assert!(n >= 2);
    let dx = cast::<T>(2.0) * l / cast::<T>(n as f64);
    let points: Vec<T> = (0..n)
        .map(|i| -l + dx * (cast::<T>(i as f64) + cast::<T>(0.5)))
        .collect();
    let log_pi: Vec<T> = points.iter().map(|x| target.log_density(&[*x])).collect();
    let grads: Vec<T> = points
        .iter()
        .map(|x| target.grad_log_density(&[*x])[0])
        .collect();
    let pi_hat = normalize_log_weights(&log_pi);

    // q[i][j] = q(x_i, x_j)
    let mut q = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let lq = kernel
                .log_q(&points[i..=i], &grads[i..=i], &points[j..=j])
                .expect("grid chains need a tractable proposal density");
            q[i * n + j] = lq.exp();
        }
    }
    assemble(points, pi_hat, q, dx)
}

/// Grid chain of the independence sampler that proposes straight from the
/// grid target; its transition matrix is rank one and its gap is exactly 1.
pub fn build_independence_chain<T: Scalar>(
    target: &TargetModel<T>,
    n: usize,
    l: T,
) -> GridChain<T> {
    assert_eq!(target.dim(), 1);
    let dx = cast::<T>(2.0) * l / cast::<T>(n as f64);
    let points: Vec<T> = (0..n)
        .map(|i| -l + dx * (cast::<T>(i as f64) + cast::<T>(0.5)))
        .collect();
    let log_pi: Vec<T> = points.iter().map(|x| target.log_density(&[*x])).collect();
    let pi_hat = normalize_log_weights(&log_pi);
    let mut q = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                q[i * n + j] = pi_hat[j] / dx;
            }
        }
    }
    assemble(points, pi_hat, q, dx)
}

fn normalize_log_weights<T: Scalar>(log_w: &[T]) -> Vec<T> {
    let max = log_w.iter().copied().fold(T::neg_infinity(), T::max);
    let w: Vec<T> = log_w.iter().map(|lw| (*lw - max).exp()).collect();
    let total: T = w.iter().copied().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn assemble<T: Scalar>(points: Vec<T>, pi_hat: Vec<T>, q: Vec<T>, dx: T) -> GridChain<T> {
    let n = points.len();
    let mut p = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let flow = (pi_hat[i] * q[i * n + j]).min(pi_hat[j] * q[j * n + i]) * dx;
            p[i * n + j] = flow / pi_hat[i];
            p[j * n + i] = flow / pi_hat[j];
        }
    }
    // The discretized off-diagonal mass can exceed one on coarse grids; a
    // global lazy factor preserves reversibility exactly.
    let max_out = (0..n)
        .map(|i| {
            (0..n)
                .filter(|j| *j != i)
                .map(|j| p[i * n + j])
                .sum::<T>()
        })
        .fold(T::zero(), T::max);
    if max_out > T::one() {
        let c = cast::<T>(0.999) / max_out;
        for v in p.iter_mut() {
            *v *= c;
        }
    }
    for i in 0..n {
        let out: T = (0..n).filter(|j| *j != i).map(|j| p[i * n + j]).sum();
        p[i * n + i] = T::one() - out;
    }
    let chain = GridChain { points, pi_hat, p };
    chain.validate().expect("construction preserves invariants");
    chain
}

/// A gap estimate together with its grid-refinement cross-check (same
/// domain, doubled resolution).
#[derive(Clone, Copy, Debug)]
pub struct GapEstimate<T: Scalar> {
    pub gap: T,
    pub gap_refined: T,
}

impl<T: Scalar> GapEstimate<T> {
    /// Relative change under refinement; gates whether the gap is reported
    /// as resolved.
    pub fn rel_change(&self) -> T {
        let denom = self.gap.abs().max(self.gap_refined.abs());
        if denom == T::zero() {
            T::zero()
        } else {
            (self.gap - self.gap_refined).abs() / denom
        }
    }

    pub fn stable_within(&self, tol: T) -> bool {
        self.rel_change() <= tol
    }
}

/// Gap at resolution `n` plus the doubled-resolution cross-check.
pub fn stable_gap<T: Scalar>(
    target: &TargetModel<T>,
    kernel: &ProposalKernel<T>,
    n: usize,
    l: T,
) -> GapEstimate<T> {
    let gap = build_grid_chain(target, kernel, n, l).spectral_gap();
    let gap_refined = build_grid_chain(target, kernel, 2 * n, l).spectral_gap();
    GapEstimate { gap, gap_refined }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_chain_has_unit_gap() {
        let target = TargetModel::std_gaussian(1);
        let chain = build_independence_chain(&target, 100, 8.0);
        let gap: f64 = chain.spectral_gap();
        assert!((gap - 1.0).abs() < 1e-8, "gap = {gap}");
        // independence sampler: P_ij = pi_j
        for i in [0usize, 17, 63] {
            for j in [3usize, 50, 99] {
                if i != j {
                    assert!((chain.transition(i, j) - chain.stationary()[j]).abs() < 1e-12);
                }
            }
        }
        // conductance of any set equals the complement's mass
        let k = chain.right_set(0.0);
        let mass_kc: f64 = 1.0 - k.iter().map(|i| chain.stationary()[*i]).sum::<f64>();
        assert!((chain.conductance(&k) - mass_kc).abs() < 1e-10);
    }

    #[test]
    fn two_point_flip_chain_eigenvalues() {
        let p_flip = 0.3f64;
        let points = vec![-1.0, 1.0];
        let pi = vec![0.5, 0.5];
        let p = vec![1.0 - p_flip, p_flip, p_flip, 1.0 - p_flip];
        let chain = GridChain::from_parts(points, pi, p).unwrap();
        let gap = chain.spectral_gap();
        assert!((gap - 2.0 * p_flip).abs() < 1e-12);
    }

    #[test]
    fn rwm_grid_gap_is_refinement_stable() {
        let target = TargetModel::std_gaussian(1);
        let kernel = ProposalKernel::rwm(2.4).unwrap();
        let est = stable_gap(&target, &kernel, 200, 8.0);
        assert!(
            est.stable_within(0.02),
            "gap {} vs refined {}",
            est.gap,
            est.gap_refined
        );
        // domain enlargement is also within the same band
        let wider: f64 = build_grid_chain(&target, &kernel, 250, 10.0).spectral_gap();
        assert!((est.gap - wider).abs() / est.gap < 0.02);
    }

    #[test]
    fn conductance_upper_bounds_gap() {
        let target = TargetModel::std_gaussian(1);
        for sigma in [0.5, 1.0, 2.4] {
            let kernel = ProposalKernel::rwm(sigma).unwrap();
            let chain = build_grid_chain(&target, &kernel, 160, 8.0);
            let gap: f64 = chain.spectral_gap();
            let k = chain.right_set(0.0);
            let phi = chain.conductance(&k);
            assert!(gap <= 2.0 * phi + 1e-12, "gap {gap} vs 2 phi {}", 2.0 * phi);
        }
    }

    #[test]
    fn rwm_conductance_shrinks_with_sigma() {
        let target = TargetModel::std_gaussian(1);
        let mut last = f64::INFINITY;
        for sigma in [1.0, 0.1, 0.01] {
            let kernel = ProposalKernel::rwm(sigma).unwrap();
            let chain = build_grid_chain(&target, &kernel, 200, 8.0);
            let k = chain.right_set(0.0);
            let phi: f64 = chain.conductance(&k);
            assert!(phi < last, "phi({sigma}) = {phi} not below {last}");
            last = phi;
        }
    }
}
