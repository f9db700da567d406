//! Generic Metropolis--Hastings driver.
//!
//! Accepts a proposal `y` with probability
//! `min(1, pi(y) q(y,x) / (pi(x) q(x,y)))`, with every term supplied in log
//! space by the proposal family. Gradients are cached: the evaluation at an
//! accepted proposal becomes the next state's cached gradient, so Barker and
//! MALA cost exactly one gradient evaluation per step and Hamiltonian
//! trajectories cost `L + 1`.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adaptation::{AdaptationState, AdaptationTrace};
use crate::proposals::{ProposalAux, ProposalKernel};
use crate::scalar::Scalar;
use crate::targets::TargetModel;

/// RNG for one replicate: a fixed master seed selects the generator, the
/// replicate index selects an independent stream of the same generator.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Current position with cached target evaluations.
#[derive(Clone, Debug)]
pub struct ChainState<T: Scalar> {
    pub x: Vec<T>,
    pub log_pi: T,
    /// Cached gradient at `x`; empty for families that do not use it.
    pub grad: Vec<T>,
    pub t: u64,
}

impl<T: Scalar> ChainState<T> {
    pub fn init(target: &TargetModel<T>, x0: Vec<T>, needs_gradient: bool) -> Self {
        assert_eq!(x0.len(), target.dim(), "init point has wrong dimension");
        let (log_pi, grad) = if needs_gradient {
            target.log_density_and_grad(&x0)
        } else {
            (target.log_density(&x0), Vec::new())
        };
        assert!(
            log_pi.is_finite(),
            "chain must start at a point of finite log-density"
        );
        ChainState {
            x: x0,
            log_pi,
            grad,
            t: 0,
        }
    }
}

/// What one transition did.
#[derive(Clone, Debug)]
pub struct StepOutcome<T: Scalar> {
    pub accept_prob: T,
    pub accepted: bool,
    pub proposal: Vec<T>,
    pub divergent: bool,
    /// Target gradient evaluations this step cost.
    pub grad_evals: u64,
}

/// One Metropolis--Hastings transition. Divergent proposals (non-finite
/// positions, gradients, or Hastings terms) are rejected with acceptance
/// probability zero and flagged.
pub fn mh_step<T: Scalar, R: Rng + ?Sized>(
    state: &mut ChainState<T>,
    kernel: &ProposalKernel<T>,
    target: &TargetModel<T>,
    rng: &mut R,
) -> StepOutcome<T> {
    #[cfg(debug_assertions)]
    if state.t.is_multiple_of(64) {
        let lp = target.log_density(&state.x);
        debug_assert!(
            (lp - state.log_pi).abs() <= T::from_f64(1e-10).unwrap() * (T::one() + lp.abs()),
            "stale cached log-density"
        );
        if kernel.family().uses_gradient() {
            let g = target.grad_log_density(&state.x);
            debug_assert!(
                g.iter()
                    .zip(&state.grad)
                    .all(|(a, b)| (*a - *b).abs()
                        <= T::from_f64(1e-10).unwrap() * (T::one() + a.abs())),
                "stale cached gradient"
            );
        }
    }
    fn reject_divergent<T: Scalar>(
        state: &mut ChainState<T>,
        proposal: Vec<T>,
        grad_evals: u64,
    ) -> StepOutcome<T> {
        state.t += 1;
        StepOutcome {
            accept_prob: T::zero(),
            accepted: false,
            proposal,
            divergent: true,
            grad_evals,
        }
    }

    let uses_grad = kernel.family().uses_gradient();
    let out = kernel.propose(&state.x, &state.grad, target, rng);
    let mut grad_evals = out.internal_grad_evals();
    if out.divergent {
        return reject_divergent(state, out.y, grad_evals);
    }

    let (log_pi_y, grad_y) = match &out.aux {
        ProposalAux::Hmc {
            log_pi_y, grad_y, ..
        } => (*log_pi_y, grad_y.clone()),
        _ => {
            if uses_grad {
                grad_evals += 1;
                target.log_density_and_grad(&out.y)
            } else {
                (target.log_density(&out.y), Vec::new())
            }
        }
    };
    if log_pi_y.is_nan() || log_pi_y == T::infinity() {
        return reject_divergent(state, out.y, grad_evals);
    }
    if uses_grad && !grad_y.iter().all(|g| g.is_finite()) {
        return reject_divergent(state, out.y, grad_evals);
    }

    let log_q_rev = kernel.log_q_rev(&state.x, &out.y, &grad_y, &out.aux);
    let log_alpha = (log_pi_y - state.log_pi) + (log_q_rev - out.log_q_fwd);
    if log_alpha.is_nan() {
        return reject_divergent(state, out.y, grad_evals);
    }
    let accept_prob = log_alpha.min(T::zero()).exp();
    let accepted = T::unit_uniform(rng) < accept_prob;
    if accepted {
        state.x.clone_from(&out.y);
        state.log_pi = log_pi_y;
        state.grad = grad_y;
    }
    state.t += 1;
    StepOutcome {
        accept_prob,
        accepted,
        proposal: out.y,
        divergent: false,
        grad_evals,
    }
}

/// Summary of how a chain was produced, persisted next to its CSV.
#[derive(Clone, Debug, Serialize)]
pub struct TraceManifest {
    pub kernel_family: String,
    pub sigma: f64,
    pub target: String,
    pub n_steps: usize,
    pub seed: u64,
    pub stream: u64,
}

/// A complete chain: states, proposals, and per-step acceptance data.
#[derive(Clone, Debug)]
pub struct Trace<T: Scalar> {
    pub dim: usize,
    pub init: Vec<T>,
    /// Row `t` is the state after step `t+1`, flattened row-major.
    pub samples: Vec<T>,
    /// Row `t` is the proposal made at step `t+1`.
    pub proposals: Vec<T>,
    pub accept_prob: Vec<T>,
    pub accepted: Vec<bool>,
    pub grad_evals: u64,
    pub divergences: u64,
    pub manifest: TraceManifest,
}

impl<T: Scalar> Trace<T> {
    pub fn len(&self) -> usize {
        self.accept_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accept_prob.is_empty()
    }

    pub fn sample_row(&self, t: usize) -> &[T] {
        &self.samples[t * self.dim..(t + 1) * self.dim]
    }

    pub fn proposal_row(&self, t: usize) -> &[T] {
        &self.proposals[t * self.dim..(t + 1) * self.dim]
    }

    /// State before step `t` was taken: the init point for `t = 0`.
    pub fn state_before(&self, t: usize) -> &[T] {
        if t == 0 {
            &self.init
        } else {
            self.sample_row(t - 1)
        }
    }

    /// The series of one coordinate across all stored states.
    pub fn component(&self, i: usize) -> Vec<T> {
        (0..self.len()).map(|t| self.sample_row(t)[i]).collect()
    }

    pub fn mean_accept_prob(&self) -> T {
        self.accept_prob.iter().copied().sum::<T>()
            / T::from_f64(self.len() as f64).expect("length fits")
    }

    /// Persist as CSV with columns `t, x_1..x_d, accept_prob, accepted`.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(w, "t")?;
        for i in 1..=self.dim {
            write!(w, ",x_{i}")?;
        }
        writeln!(w, ",accept_prob,accepted")?;
        for t in 0..self.len() {
            write!(w, "{}", t + 1)?;
            for v in self.sample_row(t) {
                write!(w, ",{v}")?;
            }
            writeln!(
                w,
                ",{},{}",
                self.accept_prob[t],
                u8::from(self.accepted[t])
            )?;
        }
        Ok(())
    }

    pub fn write_manifest(&self, path: &Path) -> std::io::Result<()> {
        let payload = serde_json::json!({
            "manifest": &self.manifest,
            "grad_evals": self.grad_evals,
            "divergences": self.divergences,
        });
        std::fs::write(path, serde_json::to_string_pretty(&payload).unwrap())
    }
}

fn new_trace<T: Scalar>(
    dim: usize,
    init: Vec<T>,
    n_steps: usize,
    kernel: &ProposalKernel<T>,
    target: &TargetModel<T>,
    seed: u64,
    stream: u64,
) -> Trace<T> {
    Trace {
        dim,
        init,
        samples: Vec::with_capacity(n_steps * dim),
        proposals: Vec::with_capacity(n_steps * dim),
        accept_prob: Vec::with_capacity(n_steps),
        accepted: Vec::with_capacity(n_steps),
        grad_evals: 0,
        divergences: 0,
        manifest: TraceManifest {
            kernel_family: kernel.family().name().to_string(),
            sigma: kernel.sigma().to_f64().unwrap_or(f64::NAN),
            target: target.describe(),
            n_steps,
            seed,
            stream,
        },
    }
}

fn record_step<T: Scalar>(trace: &mut Trace<T>, state: &ChainState<T>, out: &StepOutcome<T>) {
    trace.samples.extend_from_slice(&state.x);
    trace.proposals.extend_from_slice(&out.proposal);
    trace.accept_prob.push(out.accept_prob);
    trace.accepted.push(out.accepted);
    trace.grad_evals += out.grad_evals;
    trace.divergences += u64::from(out.divergent);
}

/// Run a fixed-kernel chain for `n_steps`, deterministically in
/// `(seed, stream)`.
pub fn run_chain<T: Scalar>(
    init: Vec<T>,
    kernel: &ProposalKernel<T>,
    target: &TargetModel<T>,
    n_steps: usize,
    seed: u64,
) -> Trace<T> {
    run_chain_stream(init, kernel, target, n_steps, seed, 0)
}

pub fn run_chain_stream<T: Scalar>(
    init: Vec<T>,
    kernel: &ProposalKernel<T>,
    target: &TargetModel<T>,
    n_steps: usize,
    seed: u64,
    stream: u64,
) -> Trace<T> {
    assert!(n_steps >= 1);
    let mut rng = replicate_rng(seed, stream);
    let mut state = ChainState::init(target, init.clone(), kernel.family().uses_gradient());
    let mut trace = new_trace(target.dim(), init, n_steps, kernel, target, seed, stream);
    for _ in 0..n_steps {
        let out = mh_step(&mut state, kernel, target, &mut rng);
        record_step(&mut trace, &state, &out);
    }
    trace
}

/// Run an adaptively tuned chain: before every step the kernel is re-derived
/// from the adaptation state, and after every step the state is updated with
/// the realized acceptance probability.
pub fn run_chain_adaptive<T: Scalar>(
    init: Vec<T>,
    base_kernel: &ProposalKernel<T>,
    target: &TargetModel<T>,
    n_steps: usize,
    seed: u64,
    stream: u64,
    adaptation: AdaptationState<T>,
) -> (Trace<T>, AdaptationTrace<T>) {
    let mut rng = replicate_rng(seed, stream);
    run_chain_adaptive_with_rng(
        init,
        base_kernel,
        target,
        n_steps,
        &mut rng,
        adaptation,
        (seed, stream),
    )
}

/// Adaptive run continuing from an externally prepared RNG (e.g. after
/// drawing the initial point from it); `provenance` records the
/// `(seed, stream)` that produced the RNG for the trace manifest.
pub fn run_chain_adaptive_with_rng<T: Scalar, R: Rng + ?Sized>(
    init: Vec<T>,
    base_kernel: &ProposalKernel<T>,
    target: &TargetModel<T>,
    n_steps: usize,
    rng: &mut R,
    mut adaptation: AdaptationState<T>,
    provenance: (u64, u64),
) -> (Trace<T>, AdaptationTrace<T>) {
    assert!(n_steps >= 1);
    let mut state = ChainState::init(target, init.clone(), base_kernel.family().uses_gradient());
    let mut trace = new_trace(
        target.dim(),
        init,
        n_steps,
        base_kernel,
        target,
        provenance.0,
        provenance.1,
    );
    let mut adapt_trace = AdaptationTrace::with_capacity(target.dim(), n_steps);
    for _ in 0..n_steps {
        let kernel_t = adaptation.tuned_kernel(base_kernel);
        let out = mh_step(&mut state, &kernel_t, target, rng);
        adaptation.update(&state.x, out.accept_prob);
        record_step(&mut trace, &state, &out);
        adapt_trace.record(&adaptation);
    }
    (trace, adapt_trace)
}
