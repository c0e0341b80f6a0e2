//! Floating-point abstraction shared by every numeric routine in the crate.
//!
//! Algorithms are written against [`Scalar`] and monomorphised for `f32` and
//! `f64`. Configuration values (radii, step sizes, learning rates) stay `f64`
//! and are converted at the boundary with [`Scalar::of`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts a configuration-layer `f64` into the working precision.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as FromPrimitive>::from_usize(x).expect("usize is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Smallest magnitude kept by weight normalisation; anything below is flushed to zero.
    #[inline]
    fn flush_threshold() -> Self {
        // 1e-300 underflows in f32, where the smallest positive normal is the natural floor.
        Self::of(1e-300).max(Self::min_positive_value())
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln(Σ exp(x_i))`, computed after subtracting the maximum.
pub fn log_sum_exp<S: Scalar>(xs: impl IntoIterator<Item = S> + Clone) -> S {
    let max = xs.clone().into_iter().fold(S::neg_infinity(), S::max);
    if max == S::neg_infinity() {
        return max;
    }
    let sum: S = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Normalises `v` in place so it sums to one, flushing denormal-scale entries first.
pub(crate) fn renormalize<S: Scalar>(v: &mut [S]) {
    let floor = S::flush_threshold();
    for x in v.iter_mut() {
        if *x < floor {
            *x = S::zero();
        }
    }
    let total: S = v.iter().copied().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
}

/// Shannon entropy `-Σ w log w` with the `0 log 0 = 0` convention.
pub fn entropy<S: Scalar>(w: &[S]) -> S {
    w.iter()
        .filter(|&&x| x > S::zero())
        .map(|&x| -x * x.ln())
        .sum()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
