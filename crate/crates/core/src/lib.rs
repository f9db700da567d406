//! Gradient-based MCMC built around the Barker proposal.
//!
//! The crate provides:
//!
//! - analytic target distributions with exact gradients ([`targets`]),
//!   including a scale family for controlled heterogeneity and a Poisson
//!   random-effects posterior;
//! - proposal families ([`proposals`]): random walk, Langevin (plus
//!   truncated and tamed variants), coordinatewise and global-flip Barker,
//!   preconditioned versions, fixed-length Hamiltonian, and a generic
//!   first-order locally-balanced sampler for bounded balancing functions;
//! - a Metropolis--Hastings driver with deterministic seeding and exact
//!   gradient-call accounting ([`sampler`]);
//! - Robbins--Monro adaptation of the global scale and preconditioner
//!   ([`adaptation`]);
//! - performance and robustness metrics ([`diagnostics`]);
//! - exact spectral gaps of discretized one-dimensional chains
//!   ([`gap_lab`]);
//! - a config-driven experiment harness ([`experiments`]) behind the
//!   `barker-mcmc` CLI.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the default double-precision instantiations.

pub mod adaptation;
pub mod diagnostics;
pub mod experiments;
pub mod gap_lab;
pub mod math;
pub mod proposals;
pub mod sampler;
pub mod scalar;
pub mod targets;

pub use scalar::Scalar;

/// Default double-precision instantiations.
pub type TargetModel64 = targets::TargetModel<f64>;
pub type ProposalKernel64 = proposals::ProposalKernel<f64>;
pub type BalancingFn64 = proposals::BalancingFn<f64>;
pub type ChainState64 = sampler::ChainState<f64>;
pub type Trace64 = sampler::Trace<f64>;
pub type AdaptationState64 = adaptation::AdaptationState<f64>;
pub type GridChain64 = gap_lab::GridChain<f64>;
