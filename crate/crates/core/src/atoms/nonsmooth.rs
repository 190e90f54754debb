//! Nonsmooth norms: `abs` (ℓ1 penalty) and `norm2` (group / TV penalty).

use super::{Atom, AtomError, AtomMode, KinkPolar};
use crate::scalar::{le_tol, norm2, norm_inf, Scalar};

/// `x ↦ |x|`, coordinatewise; on a block this is the ℓ1 norm.
#[derive(Clone, Copy, Debug, Default)]
pub struct Abs;

impl<T: Scalar> Atom<T> for Abs {
    fn name(&self) -> &str {
        "abs"
    }

    fn supports(&self, mode: AtomMode) -> bool {
        !matches!(mode, AtomMode::Grad | AtomMode::Lipschitz)
    }

    fn value(&self, x: &[T]) -> T {
        x.iter().map(|v| v.abs()).sum()
    }

    fn prox(&self, x: &[T], step: T, out: &mut [T]) -> Result<(), AtomError> {
        for (o, &v) in out.iter_mut().zip(x) {
            let m = v.abs() - step;
            *o = if m > T::zero() { v.signum() * m } else { T::zero() };
        }
        Ok(())
    }

    // indicator of the unit ℓ∞ ball
    fn conj_value(&self, y: &[T]) -> Option<T> {
        Some(if le_tol(norm_inf(y), T::one()) {
            T::zero()
        } else {
            T::infinity()
        })
    }

    fn is_kink(&self, x: &[T]) -> bool {
        x.iter().all(|&v| v == T::zero())
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        for (o, &v) in out.iter_mut().zip(y) {
            *o = v.max(-T::one()).min(T::one());
        }
        true
    }

    fn conj_domain_polar(&self, v: &[T]) -> Option<T> {
        Some(norm_inf(v))
    }

    fn kink_anchor(&self, _x: &[T], anchor: &mut [T]) -> Option<KinkPolar> {
        anchor.fill(T::zero());
        Some(KinkPolar::LinfBall)
    }
}

/// Euclidean norm of the whole block.
#[derive(Clone, Copy, Debug, Default)]
pub struct Norm2;

impl<T: Scalar> Atom<T> for Norm2 {
    fn name(&self) -> &str {
        "norm2"
    }

    fn supports(&self, mode: AtomMode) -> bool {
        !matches!(mode, AtomMode::Grad | AtomMode::Lipschitz)
    }

    fn value(&self, x: &[T]) -> T {
        norm2(x)
    }

    fn prox(&self, x: &[T], step: T, out: &mut [T]) -> Result<(), AtomError> {
        let n = norm2(x);
        let scale = if n > step { T::one() - step / n } else { T::zero() };
        for (o, &v) in out.iter_mut().zip(x) {
            *o = scale * v;
        }
        Ok(())
    }

    fn conj_value(&self, y: &[T]) -> Option<T> {
        Some(if le_tol(norm2(y), T::one()) {
            T::zero()
        } else {
            T::infinity()
        })
    }

    fn is_kink(&self, x: &[T]) -> bool {
        x.iter().all(|&v| v == T::zero())
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        let n = norm2(y);
        let scale = if n > T::one() { T::one() / n } else { T::one() };
        for (o, &v) in out.iter_mut().zip(y) {
            *o = scale * v;
        }
        true
    }

    fn conj_domain_polar(&self, v: &[T]) -> Option<T> {
        Some(norm2(v))
    }

    fn kink_anchor(&self, _x: &[T], anchor: &mut [T]) -> Option<KinkPolar> {
        anchor.fill(T::zero());
        Some(KinkPolar::L2Ball)
    }
}
