//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar the solver is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal; every literal used by the crate is representable.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Slack used when testing membership in closed sets (indicator values,
    /// conjugate domains). Points produced by projections land on the
    /// boundary up to round-off and must not be declared infeasible.
    #[inline]
    fn feas_tol() -> Self {
        Self::lit(1e-9).max(Self::epsilon() * Self::lit(100.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Euclidean inner product.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Euclidean distance between two vectors of equal length.
#[inline]
pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

/// `true` when `v <= bound` up to the membership slack, scaled by magnitude.
#[inline]
pub(crate) fn le_tol<T: Scalar>(v: T, bound: T) -> bool {
    v <= bound + T::feas_tol() * T::one().max(bound.abs())
}
