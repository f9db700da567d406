//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate that does real arithmetic is generic over a
//! [`Scalar`], which is `num_traits::Float` plus the handful of extras the
//! samplers need: special functions (via `libm`) and the ability to draw
//! standard Gaussian / uniform variates from any `Rng`. Only `f32` and `f64`
//! implement it; concrete aliases live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::StandardNormal;

pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// One draw from N(0, 1).
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from U[0, 1).
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Natural log of the gamma function.
    fn ln_gamma(self) -> Self;
}

impl Scalar for f64 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn ln_gamma(self) -> Self {
        libm::lgamma(self)
    }
}

impl Scalar for f32 {
    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn ln_gamma(self) -> Self {
        libm::lgammaf(self)
    }
}

/// Finite and strictly positive; rejects NaN, unlike `v > 0` negations.
#[inline]
pub fn positive<T: Scalar>(v: T) -> bool {
    v.is_finite() && v > T::zero()
}

/// Convert an `f64` literal into the working scalar type.
///
/// Panics only if the value is not representable, which cannot happen for
/// the in-range constants this crate uses it with.
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}
