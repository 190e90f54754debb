//! Convex indicators. Their value is `0` inside the set (up to the membership
//! slack of [`Scalar::feas_tol`]) and `+∞` outside.

use super::{Atom, AtomError, AtomMode, HalfLine, KinkPolar};
use crate::scalar::{le_tol, Scalar};

fn indicator<T: Scalar>(inside: bool) -> T {
    if inside {
        T::zero()
    } else {
        T::infinity()
    }
}

fn supports_indicator(mode: AtomMode) -> bool {
    !matches!(mode, AtomMode::Grad | AtomMode::Lipschitz)
}

/// `ι_{[0,1]}`, coordinatewise.
#[derive(Clone, Copy, Debug, Default)]
pub struct Box01;

impl<T: Scalar> Atom<T> for Box01 {
    fn name(&self) -> &str {
        "box01"
    }

    fn supports(&self, mode: AtomMode) -> bool {
        supports_indicator(mode)
    }

    fn value(&self, x: &[T]) -> T {
        indicator(x.iter().all(|&v| le_tol(-v, T::zero()) && le_tol(v, T::one())))
    }

    fn prox(&self, x: &[T], _step: T, out: &mut [T]) -> Result<(), AtomError> {
        self.project_domain(x, out);
        Ok(())
    }

    // support function of [0,1]
    fn conj_value(&self, y: &[T]) -> Option<T> {
        Some(y.iter().map(|&v| v.max(T::zero())).sum())
    }

    fn is_kink(&self, x: &[T]) -> bool {
        x.iter().all(|&v| v == T::zero() || v == T::one())
    }

    fn project_domain(&self, x: &[T], out: &mut [T]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v.max(T::zero()).min(T::one());
        }
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        out.copy_from_slice(y);
        true
    }

    fn conj_domain_polar(&self, _v: &[T]) -> Option<T> {
        Some(T::zero())
    }

    fn kink_anchor(&self, x: &[T], anchor: &mut [T]) -> Option<KinkPolar> {
        let half = T::lit(0.5);
        let mut signs = Vec::with_capacity(x.len());
        for (a, &v) in anchor.iter_mut().zip(x) {
            if v <= half {
                *a = T::zero();
                signs.push(HalfLine::NonPositive);
            } else {
                *a = T::one();
                signs.push(HalfLine::NonNegative);
            }
        }
        Some(KinkPolar::Orthant(signs))
    }
}

/// `ι_{ℝ₊}`, coordinatewise.
#[derive(Clone, Copy, Debug, Default)]
pub struct NonNeg;

impl<T: Scalar> Atom<T> for NonNeg {
    fn name(&self) -> &str {
        "nonneg"
    }

    fn supports(&self, mode: AtomMode) -> bool {
        supports_indicator(mode)
    }

    fn value(&self, x: &[T]) -> T {
        indicator(x.iter().all(|&v| le_tol(-v, T::zero())))
    }

    fn prox(&self, x: &[T], _step: T, out: &mut [T]) -> Result<(), AtomError> {
        self.project_domain(x, out);
        Ok(())
    }

    // indicator of ℝ₋
    fn conj_value(&self, y: &[T]) -> Option<T> {
        Some(indicator(y.iter().all(|&v| le_tol(v, T::zero()))))
    }

    fn is_kink(&self, x: &[T]) -> bool {
        x.iter().all(|&v| v == T::zero())
    }

    fn project_domain(&self, x: &[T], out: &mut [T]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v.max(T::zero());
        }
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        for (o, &v) in out.iter_mut().zip(y) {
            *o = v.min(T::zero());
        }
        true
    }

    fn conj_domain_polar(&self, v: &[T]) -> Option<T> {
        Some(indicator(v.iter().all(|&u| le_tol(u, T::zero()))))
    }

    fn kink_anchor(&self, x: &[T], anchor: &mut [T]) -> Option<KinkPolar> {
        anchor.fill(T::zero());
        Some(KinkPolar::Orthant(vec![HalfLine::NonPositive; x.len()]))
    }
}

/// `ι_{ℝ₋}`, coordinatewise (inequality constraints `Ax ≤ b`).
#[derive(Clone, Copy, Debug, Default)]
pub struct NonPos;

impl<T: Scalar> Atom<T> for NonPos {
    fn name(&self) -> &str {
        "nonpos"
    }

    fn supports(&self, mode: AtomMode) -> bool {
        supports_indicator(mode)
    }

    fn value(&self, x: &[T]) -> T {
        indicator(x.iter().all(|&v| le_tol(v, T::zero())))
    }

    fn prox(&self, x: &[T], _step: T, out: &mut [T]) -> Result<(), AtomError> {
        self.project_domain(x, out);
        Ok(())
    }

    // indicator of ℝ₊
    fn conj_value(&self, y: &[T]) -> Option<T> {
        Some(indicator(y.iter().all(|&v| le_tol(-v, T::zero()))))
    }

    fn is_kink(&self, x: &[T]) -> bool {
        x.iter().all(|&v| v == T::zero())
    }

    fn project_domain(&self, x: &[T], out: &mut [T]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v.min(T::zero());
        }
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        for (o, &v) in out.iter_mut().zip(y) {
            *o = v.max(T::zero());
        }
        true
    }

    fn conj_domain_polar(&self, v: &[T]) -> Option<T> {
        Some(indicator(v.iter().all(|&u| le_tol(-u, T::zero()))))
    }

    fn kink_anchor(&self, x: &[T], anchor: &mut [T]) -> Option<KinkPolar> {
        anchor.fill(T::zero());
        Some(KinkPolar::Orthant(vec![HalfLine::NonNegative; x.len()]))
    }
}

/// `ι_{0}` (equality constraints `Ax = b`).
#[derive(Clone, Copy, Debug, Default)]
pub struct EqZero;

impl<T: Scalar> Atom<T> for EqZero {
    fn name(&self) -> &str {
        "eq"
    }

    fn supports(&self, mode: AtomMode) -> bool {
        supports_indicator(mode)
    }

    fn value(&self, x: &[T]) -> T {
        indicator(x.iter().all(|&v| le_tol(v.abs(), T::zero())))
    }

    fn prox(&self, _x: &[T], _step: T, out: &mut [T]) -> Result<(), AtomError> {
        out.fill(T::zero());
        Ok(())
    }

    fn conj_value(&self, _y: &[T]) -> Option<T> {
        Some(T::zero())
    }

    fn is_kink(&self, x: &[T]) -> bool {
        x.iter().all(|&v| v == T::zero())
    }

    fn project_domain(&self, _x: &[T], out: &mut [T]) {
        out.fill(T::zero());
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        out.copy_from_slice(y);
        true
    }

    fn conj_domain_polar(&self, _v: &[T]) -> Option<T> {
        Some(T::zero())
    }

    fn kink_anchor(&self, _x: &[T], anchor: &mut [T]) -> Option<KinkPolar> {
        anchor.fill(T::zero());
        Some(KinkPolar::Whole)
    }
}
