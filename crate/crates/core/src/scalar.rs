//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the laboratory can compute in.
///
/// Implemented for `f32` and `f64`. Physical constants and literals are
/// converted through [`Real::lit`], so every routine stays agnostic of the
/// concrete width.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    fn lit_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize must be representable")
    }

    /// Lossy widening used for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `ln(sum(exp(x_i)))` without overflow; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(values: impl IntoIterator<Item = T> + Clone) -> T {
    let max = values
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |acc, x| acc.max(x));
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let sum: T = values.into_iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// `ln(1 + exp(x))`, stable for large |x|.
pub fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// Inverse hyperbolic tangent through `log1p`, accurate near |x| -> 1.
pub fn artanh<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    half * (x.ln_1p() - (-x).ln_1p())
}

/// Normalized probabilities from log weights.
pub fn softmax<T: Real>(log_weights: &[T]) -> Vec<T> {
    let lse = log_sum_exp(log_weights.iter().copied());
    log_weights.iter().map(|&lw| (lw - lse).exp()).collect()
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}
