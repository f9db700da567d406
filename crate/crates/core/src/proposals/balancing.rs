//! Balancing functions `g` with `g(t) = t g(1/t)`, which weight proposal
//! directions in the first-order locally-balanced family. `t/(1+t)` gives
//! the Barker proposal, `sqrt(t)` the Langevin one, `min(1,t)` the
//! Metropolis rule.

use std::fmt;
use std::sync::Arc;

use crate::math::log1p_exp;
use crate::scalar::{cast, positive, Scalar};

use super::ProposalError;

type EvalFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A balancing function together with the quantities the samplers need:
/// its supremum `M` (infinite for density-only choices like `sqrt`), its
/// value at 1, and a log-stable evaluation of `g(e^s)`.
#[derive(Clone)]
pub struct BalancingFn<T: Scalar> {
    name: String,
    eval: EvalFn<T>,
    log_eval_exp: EvalFn<T>,
    sup: T,
    at_one: T,
}

impl<T: Scalar> fmt::Debug for BalancingFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BalancingFn")
            .field("name", &self.name)
            .field("sup", &self.sup)
            .field("at_one", &self.at_one)
            .finish()
    }
}

impl<T: Scalar> BalancingFn<T> {
    /// Wrap a user-supplied `g`. Rejects functions that fail the balance
    /// identity `g(t) = t g(1/t)` (to 1e-10, relative) or monotonicity on a
    /// log-spaced grid over `t in [1e-6, 1e6]`, and functions exceeding the
    /// reported supremum.
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(T) -> T + Send + Sync + 'static,
        sup: T,
    ) -> Result<Self, ProposalError> {
        let eval: EvalFn<T> = Arc::new(eval);
        let inner = eval.clone();
        // Generic fallback for g(e^s): clamp the exponent so bounded g's
        // saturate instead of overflowing. Shipped functions override this
        // with closed forms.
        let log_eval_exp: EvalFn<T> = Arc::new(move |s: T| {
            let cap = cast::<T>(700.0);
            inner(s.max(-cap).min(cap).exp()).ln()
        });
        Self::build(name.into(), eval, log_eval_exp, sup)
    }

    fn build(
        name: String,
        eval: EvalFn<T>,
        log_eval_exp: EvalFn<T>,
        sup: T,
    ) -> Result<Self, ProposalError> {
        let at_one = (eval)(T::one());
        let me = BalancingFn {
            name,
            eval,
            log_eval_exp,
            sup,
            at_one,
        };
        me.validate()?;
        Ok(me)
    }

    fn validate(&self) -> Result<(), ProposalError> {
        // 1e-10 in double precision; scaled up for coarser scalars.
        let tol = cast::<T>(1e-10).max(T::epsilon() * cast::<T>(100.0));
        let mut prev: Option<T> = None;
        for i in 0..=120 {
            // log-spaced grid over [1e-6, 1e6]
            let log_t = cast::<T>(-6.0 + i as f64 * 0.1) * cast::<T>(10.0).ln();
            let t = log_t.exp();
            let g_t = (self.eval)(t);
            if !positive(g_t) {
                return Err(ProposalError::InvalidBalancing(format!(
                    "{}: g({t}) = {g_t} is not positive finite",
                    self.name
                )));
            }
            let balanced = t * (self.eval)(t.recip());
            if (g_t - balanced).abs() > tol * T::one().max(g_t) {
                return Err(ProposalError::InvalidBalancing(format!(
                    "{}: balance identity fails at t = {t}: g(t) = {g_t}, t g(1/t) = {balanced}",
                    self.name
                )));
            }
            if self.sup.is_finite() && g_t > self.sup * (T::one() + cast::<T>(1e-9)) {
                return Err(ProposalError::InvalidBalancing(format!(
                    "{}: g({t}) = {g_t} exceeds reported supremum {}",
                    self.name, self.sup
                )));
            }
            if let Some(p) = prev {
                if g_t < p - tol {
                    return Err(ProposalError::InvalidBalancing(format!(
                        "{}: not non-decreasing at t = {t}",
                        self.name
                    )));
                }
            }
            prev = Some(g_t);
        }
        Ok(())
    }

    /// Barker rule `g(t) = t / (1 + t)`; bounded by 1, normalizer 1/2.
    pub fn barker() -> Self {
        Self::build(
            "barker".into(),
            Arc::new(|t: T| t / (T::one() + t)),
            Arc::new(|s: T| -log1p_exp(-s)),
            T::one(),
        )
        .expect("barker balancing is valid")
    }

    /// Metropolis rule `g(t) = min(1, t)`; bounded by 1.
    pub fn metropolis_min() -> Self {
        Self::build(
            "min(1,t)".into(),
            Arc::new(|t: T| t.min(T::one())),
            Arc::new(|s: T| s.min(T::zero())),
            T::one(),
        )
        .expect("metropolis balancing is valid")
    }

    /// Langevin rule `g(t) = sqrt(t)`. Unbounded: usable for densities and
    /// balance checks, rejected by the rejection sampler (MALA is the
    /// dedicated closed-form special case).
    pub fn sqrt() -> Self {
        Self::build(
            "sqrt".into(),
            Arc::new(|t: T| t.sqrt()),
            Arc::new(|s: T| s / cast::<T>(2.0)),
            T::infinity(),
        )
        .expect("sqrt balancing is valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `g(t)`.
    pub fn eval(&self, t: T) -> T {
        (self.eval)(t)
    }

    /// `ln g(e^s)`, stable for `|s|` up to overflow scale.
    pub fn log_eval_exp(&self, s: T) -> T {
        (self.log_eval_exp)(s)
    }

    /// Reported supremum `M` (may be infinite).
    pub fn sup(&self) -> T {
        self.sup
    }

    /// `g(1)`.
    pub fn at_one(&self) -> T {
        self.at_one
    }

    pub fn is_bounded(&self) -> bool {
        self.sup.is_finite()
    }
}
