//! Atom functions: small convex functions with a uniform multi-mode contract.
//!
//! Every atom acts on a block of coordinates. Scalar atoms are extended to
//! blocks coordinatewise, `f(x) = Σ_l f0(x_l)`. Solver loops only talk to the
//! [`Atom`] trait, so new atoms can be registered in an [`AtomCatalog`]
//! without touching them.
//!
//! Proximal operators follow the convention
//! `prox_{ρ f}(x) = argmin_p ρ f(p) + ½‖p − x‖²`.

use std::fmt;

use thiserror::Error;

use crate::scalar::{dot, Scalar};

mod catalog;
mod indicators;
mod nonsmooth;
mod smooth;

pub use catalog::{catalog_lookup, AtomCatalog, AtomRef};
pub use indicators::{Box01, EqZero, NonNeg, NonPos};
pub use nonsmooth::{Abs, Norm2};
pub use smooth::{Linear, Log1pExp, LogSumExp, Square, Zero};

/// Default smoothing used by [`val_conj_smoothed`] when an atom has no
/// closed-form conjugate.
pub const DEFAULT_CONJ_EPS: f64 = 1e-9;

/// Evaluation modes of the multi-mode contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomMode {
    Val,
    Grad,
    Prox,
    ProxConj,
    Lipschitz,
    ValConj,
    IsKink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimPolicy {
    Any,
    Fixed(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtomError {
    #[error("atom `{atom}` does not support mode {mode:?}")]
    Unsupported { atom: String, mode: AtomMode },
    #[error("atom `{atom}` expects a block of dimension {expected}, got {found}")]
    Dimension {
        atom: String,
        expected: usize,
        found: usize,
    },
    #[error("output buffer of length {found} is too short for a block of dimension {expected}")]
    Buffer { expected: usize, found: usize },
    #[error("prox parameter must be positive and finite, got {0}")]
    BadParameter(f64),
    #[error("unknown atom `{name}`{}; known atoms: {}", suggestion_suffix(.suggestion), .known.join(", "))]
    Unknown {
        name: String,
        suggestion: Option<String>,
        known: Vec<String>,
    },
}

fn suggestion_suffix(s: &Option<String>) -> String {
    match s {
        Some(s) => format!(" (did you mean `{s}`?)"),
        None => String::new(),
    }
}

/// Sign constraint of a half-line subdifferential `R−` or `R+`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfLine {
    NonPositive,
    NonNegative,
}

/// Polar `σ°_C` of the support function of `C = ∂g(x̂)` at a kink `x̂`.
///
/// Only kinks whose subdifferential has nonempty interior are described.
#[derive(Clone, Debug, PartialEq)]
pub enum KinkPolar {
    /// `C` is the unit `ℓ∞` ball, so `σ°_C = ‖·‖∞`.
    LinfBall,
    /// `C` is the unit Euclidean ball, so `σ°_C = ‖·‖₂`.
    L2Ball,
    /// `C` is a product of half-lines; `σ°_C` is 0 on `C` and `+∞` elsewhere.
    Orthant(Vec<HalfLine>),
    /// `C` is the whole space, so `σ°_C ≡ 0`.
    Whole,
}

impl KinkPolar {
    /// Evaluates `σ°_C(u)`.
    pub fn eval<T: Scalar>(&self, u: &[T]) -> T {
        match self {
            KinkPolar::LinfBall => crate::scalar::norm_inf(u),
            KinkPolar::L2Ball => crate::scalar::norm2(u),
            KinkPolar::Orthant(signs) => {
                let inside = u.iter().zip(signs).all(|(&v, s)| match s {
                    HalfLine::NonPositive => v <= T::zero(),
                    HalfLine::NonNegative => v >= T::zero(),
                });
                if inside {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
            KinkPolar::Whole => T::zero(),
        }
    }

    /// Upper bound of `σ°_C` over the Euclidean ball of radius `radius` around `u`.
    ///
    /// The two norm polars are 1-Lipschitz for the Euclidean norm. For
    /// orthants, the ball must sit strictly inside the cone, otherwise the
    /// bound is `+∞` (the dom check of the screening test).
    pub fn ball_upper_bound<T: Scalar>(&self, u: &[T], radius: T) -> T {
        match self {
            KinkPolar::LinfBall | KinkPolar::L2Ball => self.eval(u) + radius,
            KinkPolar::Orthant(signs) => {
                let inside = u.iter().zip(signs).all(|(&v, s)| match s {
                    HalfLine::NonPositive => v + radius < T::zero(),
                    HalfLine::NonNegative => v - radius > T::zero(),
                });
                if inside {
                    T::zero()
                } else {
                    T::infinity()
                }
            }
            KinkPolar::Whole => T::zero(),
        }
    }
}

/// A convex atom function acting on one block of coordinates.
///
/// Implementations must be pure. Only [`Atom::value`] is mandatory; the other
/// modes report [`AtomError::Unsupported`] unless overridden, and
/// [`Atom::supports`] must agree with what is overridden.
pub trait Atom<T: Scalar>: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn dim_policy(&self) -> DimPolicy {
        DimPolicy::Any
    }

    fn supports(&self, mode: AtomMode) -> bool;

    /// Function value, `+∞` outside the domain.
    fn value(&self, x: &[T]) -> T;

    fn gradient(&self, _x: &[T], _out: &mut [T]) -> Result<(), AtomError> {
        Err(unsupported(self.name(), AtomMode::Grad))
    }

    /// `out = prox_{step·f}(x)`.
    fn prox(&self, _x: &[T], _step: T, _out: &mut [T]) -> Result<(), AtomError> {
        Err(unsupported(self.name(), AtomMode::Prox))
    }

    /// Lipschitz constant of the gradient for the Euclidean norm.
    fn lipschitz(&self) -> Result<T, AtomError> {
        Err(unsupported(self.name(), AtomMode::Lipschitz))
    }

    /// Closed-form conjugate value, when the atom has one.
    fn conj_value(&self, _y: &[T]) -> Option<T> {
        None
    }

    /// Whether `x` is a nondifferentiability point whose subdifferential has
    /// nonempty interior.
    fn is_kink(&self, _x: &[T]) -> bool {
        false
    }

    /// Euclidean projection onto `dom f`. The default is the whole space.
    fn project_domain(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
    }

    /// Euclidean projection onto `dom f*`; returns `false` when unknown.
    fn project_conj_domain(&self, _y: &[T], _out: &mut [T]) -> bool {
        false
    }

    /// `σ°_{dom f*}(v)`, only for atoms with `0 ∈ dom f*`.
    fn conj_domain_polar(&self, _v: &[T]) -> Option<T> {
        None
    }

    /// Picks a kink anchor near `x`, writes it to `anchor` and describes the
    /// polar of the subdifferential there. `None` means no screening support.
    fn kink_anchor(&self, _x: &[T], _anchor: &mut [T]) -> Option<KinkPolar> {
        None
    }
}

pub(crate) fn unsupported(name: &str, mode: AtomMode) -> AtomError {
    AtomError::Unsupported {
        atom: name.to_string(),
        mode,
    }
}

fn check_dims<T: Scalar>(atom: &dyn Atom<T>, x: &[T], buf_len: usize) -> Result<(), AtomError> {
    match atom.dim_policy() {
        DimPolicy::Fixed(d) if d != x.len() => {
            return Err(AtomError::Dimension {
                atom: atom.name().to_string(),
                expected: d,
                found: x.len(),
            })
        }
        _ => {}
    }
    if x.is_empty() {
        return Err(AtomError::Dimension {
            atom: atom.name().to_string(),
            expected: 1,
            found: 0,
        });
    }
    if buf_len < x.len() {
        return Err(AtomError::Buffer {
            expected: x.len(),
            found: buf_len,
        });
    }
    Ok(())
}

fn check_param<T: Scalar>(p: T) -> Result<(), AtomError> {
    if p > T::zero() && p.is_finite() {
        Ok(())
    } else {
        Err(AtomError::BadParameter(p.to_f64_lossy()))
    }
}

/// Uniform multi-mode entry point.
///
/// Vector outputs go to `buf` and the first entry is returned, scalar outputs
/// are returned directly (and also written to `buf[0]` for `Lipschitz`).
/// `rho1` is the prox step, `rho2` the atom weight used by `ProxConj`.
pub fn eval_atom<T: Scalar>(
    atom: &dyn Atom<T>,
    x: &[T],
    mode: AtomMode,
    rho1: T,
    rho2: T,
    buf: &mut [T],
) -> Result<T, AtomError> {
    if mode != AtomMode::Lipschitz {
        check_dims(atom, x, buf.len())?;
    }
    match mode {
        AtomMode::Val => Ok(atom.value(x)),
        AtomMode::Grad => {
            atom.gradient(x, &mut buf[..x.len()])?;
            Ok(buf[0])
        }
        AtomMode::Prox => {
            check_param(rho1)?;
            atom.prox(x, rho1, &mut buf[..x.len()])?;
            Ok(buf[0])
        }
        AtomMode::ProxConj => {
            prox_conj(atom, x, rho1, rho2, &mut buf[..x.len()])?;
            Ok(buf[0])
        }
        AtomMode::Lipschitz => {
            let l = atom.lipschitz()?;
            if let Some(b) = buf.first_mut() {
                *b = l;
            }
            Ok(l)
        }
        AtomMode::ValConj => conj_value(atom, x),
        AtomMode::IsKink => Ok(if atom.is_kink(x) { T::one() } else { T::zero() }),
    }
}

/// `out = prox_{σ (c f)*}(x)` through Moreau's identity
/// `prox_{σ h*}(x) = x − σ prox_{h/σ}(x/σ)` with `h = c f`.
pub fn prox_conj<T: Scalar>(
    atom: &dyn Atom<T>,
    x: &[T],
    sigma: T,
    weight: T,
    out: &mut [T],
) -> Result<(), AtomError> {
    check_param(sigma)?;
    check_param(weight)?;
    if !atom.supports(AtomMode::Prox) {
        return Err(unsupported(atom.name(), AtomMode::ProxConj));
    }
    let scaled: Vec<T> = x.iter().map(|&v| v / sigma).collect();
    atom.prox(&scaled, weight / sigma, out)?;
    for (o, &v) in out.iter_mut().zip(x) {
        *o = v - sigma * *o;
    }
    Ok(())
}

/// `f*(y) ≈ ⟨p, y⟩ − f(p) − (ε/2)‖p‖²` with `p = prox_{f/ε}(y/ε)`.
pub fn val_conj_smoothed<T: Scalar>(atom: &dyn Atom<T>, y: &[T], eps: T) -> Result<T, AtomError> {
    check_param(eps)?;
    if !atom.supports(AtomMode::Prox) {
        return Err(unsupported(atom.name(), AtomMode::ValConj));
    }
    let scaled: Vec<T> = y.iter().map(|&v| v / eps).collect();
    let mut p = vec![T::zero(); y.len()];
    atom.prox(&scaled, T::one() / eps, &mut p)?;
    let fp = atom.value(&p);
    Ok(dot(&p, y) - fp - eps / (T::one() + T::one()) * dot(&p, &p))
}

/// Conjugate value: closed form when available, smoothed approximation otherwise.
pub fn conj_value<T: Scalar>(atom: &dyn Atom<T>, y: &[T]) -> Result<T, AtomError> {
    match atom.conj_value(y) {
        Some(v) => Ok(v),
        None => val_conj_smoothed(atom, y, T::lit(DEFAULT_CONJ_EPS)),
    }
}
