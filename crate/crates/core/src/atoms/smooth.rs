//! Differentiable atoms.

use super::{Atom, AtomError, AtomMode};
use crate::scalar::{le_tol, Scalar};

fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

/// `x ↦ x²`, coordinatewise.
#[derive(Clone, Copy, Debug, Default)]
pub struct Square;

impl<T: Scalar> Atom<T> for Square {
    fn name(&self) -> &str {
        "square"
    }

    fn supports(&self, _mode: AtomMode) -> bool {
        true
    }

    fn value(&self, x: &[T]) -> T {
        x.iter().map(|&v| v * v).sum()
    }

    fn gradient(&self, x: &[T], out: &mut [T]) -> Result<(), AtomError> {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = two::<T>() * v;
        }
        Ok(())
    }

    fn prox(&self, x: &[T], step: T, out: &mut [T]) -> Result<(), AtomError> {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v / (T::one() + two::<T>() * step);
        }
        Ok(())
    }

    fn lipschitz(&self) -> Result<T, AtomError> {
        Ok(two())
    }

    fn conj_value(&self, y: &[T]) -> Option<T> {
        Some(y.iter().map(|&v| v * v).sum::<T>() / T::lit(4.0))
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        out.copy_from_slice(y);
        true
    }

    fn conj_domain_polar(&self, _v: &[T]) -> Option<T> {
        Some(T::zero())
    }
}

/// `x ↦ Σ_l x_l`. Linear terms `⟨c, x⟩` are written with this atom and the
/// coefficients placed in the matrix row.
#[derive(Clone, Copy, Debug, Default)]
pub struct Linear;

impl<T: Scalar> Atom<T> for Linear {
    fn name(&self) -> &str {
        "linear"
    }

    fn supports(&self, _mode: AtomMode) -> bool {
        true
    }

    fn value(&self, x: &[T]) -> T {
        x.iter().copied().sum()
    }

    fn gradient(&self, _x: &[T], out: &mut [T]) -> Result<(), AtomError> {
        out.fill(T::one());
        Ok(())
    }

    fn prox(&self, x: &[T], step: T, out: &mut [T]) -> Result<(), AtomError> {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = v - step;
        }
        Ok(())
    }

    fn lipschitz(&self) -> Result<T, AtomError> {
        Ok(T::zero())
    }

    // conjugate is the indicator of {1}
    fn conj_value(&self, y: &[T]) -> Option<T> {
        let inside = y.iter().all(|&v| le_tol((v - T::one()).abs(), T::zero()));
        Some(if inside { T::zero() } else { T::infinity() })
    }

    fn project_conj_domain(&self, _y: &[T], out: &mut [T]) -> bool {
        out.fill(T::one());
        true
    }
}

/// The zero function.
#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl<T: Scalar> Atom<T> for Zero {
    fn name(&self) -> &str {
        "zero"
    }

    fn supports(&self, _mode: AtomMode) -> bool {
        true
    }

    fn value(&self, _x: &[T]) -> T {
        T::zero()
    }

    fn gradient(&self, _x: &[T], out: &mut [T]) -> Result<(), AtomError> {
        out.fill(T::zero());
        Ok(())
    }

    fn prox(&self, x: &[T], _step: T, out: &mut [T]) -> Result<(), AtomError> {
        out.copy_from_slice(x);
        Ok(())
    }

    fn lipschitz(&self) -> Result<T, AtomError> {
        Ok(T::zero())
    }

    fn conj_value(&self, y: &[T]) -> Option<T> {
        let inside = y.iter().all(|&v| le_tol(v.abs(), T::zero()));
        Some(if inside { T::zero() } else { T::infinity() })
    }

    fn project_conj_domain(&self, _y: &[T], out: &mut [T]) -> bool {
        out.fill(T::zero());
        true
    }

    fn conj_domain_polar(&self, v: &[T]) -> Option<T> {
        let zero = v.iter().all(|&u| le_tol(u.abs(), T::zero()));
        Some(if zero { T::zero() } else { T::infinity() })
    }
}

#[inline]
fn softplus<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `x ↦ log(1 + eˣ)`, coordinatewise (logistic loss).
#[derive(Clone, Copy, Debug, Default)]
pub struct Log1pExp;

impl Log1pExp {
    /// Root of `p + step·sigmoid(p) = x`, bracketed in `[x − step, x]`.
    fn prox_scalar<T: Scalar>(x: T, step: T) -> T {
        let mut lo = x - step;
        let mut hi = x;
        let mut p = x - step * sigmoid(x);
        for _ in 0..200 {
            let s = sigmoid(p);
            let phi = p + step * s - x;
            if phi > T::zero() {
                hi = p;
            } else {
                lo = p;
            }
            let dphi = T::one() + step * s * (T::one() - s);
            let mut next = p - phi / dphi;
            if !(next > lo && next < hi) {
                next = (lo + hi) / two::<T>();
            }
            if (next - p).abs() <= T::epsilon() * T::one().max(p.abs()) || hi - lo <= T::epsilon() * T::one().max(p.abs()) {
                return next;
            }
            p = next;
        }
        p
    }
}

impl<T: Scalar> Atom<T> for Log1pExp {
    fn name(&self) -> &str {
        "log1pexp"
    }

    fn supports(&self, _mode: AtomMode) -> bool {
        true
    }

    fn value(&self, x: &[T]) -> T {
        x.iter().map(|&v| softplus(v)).sum()
    }

    fn gradient(&self, x: &[T], out: &mut [T]) -> Result<(), AtomError> {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = sigmoid(v);
        }
        Ok(())
    }

    fn prox(&self, x: &[T], step: T, out: &mut [T]) -> Result<(), AtomError> {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = Self::prox_scalar(v, step);
        }
        Ok(())
    }

    fn lipschitz(&self) -> Result<T, AtomError> {
        Ok(T::lit(0.25))
    }

    // negative binary entropy on [0, 1]
    fn conj_value(&self, y: &[T]) -> Option<T> {
        let mut acc = T::zero();
        for &v in y {
            if !le_tol(-v, T::zero()) || !le_tol(v, T::one()) {
                return Some(T::infinity());
            }
            let v = v.max(T::zero()).min(T::one());
            acc += xlogx(v) + xlogx(T::one() - v);
        }
        Some(acc)
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        for (o, &v) in out.iter_mut().zip(y) {
            *o = v.max(T::zero()).min(T::one());
        }
        true
    }

    fn conj_domain_polar(&self, v: &[T]) -> Option<T> {
        // dom f* = [0,1]^n; the polar of σ_[0,1] is u for u ≥ 0 and +∞ for u < 0
        let mut acc = T::zero();
        for &u in v {
            if !le_tol(-u, T::zero()) {
                return Some(T::infinity());
            }
            acc = acc.max(u);
        }
        Some(acc)
    }
}

#[inline]
fn xlogx<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        v * v.ln()
    } else {
        T::zero()
    }
}

/// `x ↦ log Σ_l exp(x_l)` on a whole block (multinomial logistic loss).
#[derive(Clone, Copy, Debug, Default)]
pub struct LogSumExp;

fn softmax<T: Scalar>(x: &[T], out: &mut [T]) {
    let m = x.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut s = T::zero();
    for (o, &v) in out.iter_mut().zip(x) {
        *o = (v - m).exp();
        s += *o;
    }
    for o in out.iter_mut() {
        *o /= s;
    }
}

fn lse<T: Scalar>(x: &[T]) -> T {
    let m = x.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    m + x.iter().map(|&v| (v - m).exp()).sum::<T>().ln()
}

impl<T: Scalar> Atom<T> for LogSumExp {
    fn name(&self) -> &str {
        "logsumexp"
    }

    fn supports(&self, _mode: AtomMode) -> bool {
        true
    }

    fn value(&self, x: &[T]) -> T {
        lse(x)
    }

    fn gradient(&self, x: &[T], out: &mut [T]) -> Result<(), AtomError> {
        softmax(x, out);
        Ok(())
    }

    /// Damped Newton on `step·lse(p) + ½‖p − x‖²`. The Hessian
    /// `I + step (diag(s) − s sᵀ)` is inverted with Sherman–Morrison.
    fn prox(&self, x: &[T], step: T, out: &mut [T]) -> Result<(), AtomError> {
        let n = x.len();
        let half = T::lit(0.5);
        let obj = |p: &[T]| -> T {
            step * lse(p) + half * p.iter().zip(x).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>()
        };
        let mut p: Vec<T> = x.to_vec();
        let mut s = vec![T::zero(); n];
        let mut g = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let mut trial = vec![T::zero(); n];
        let mut gt = vec![T::zero(); n];
        let residual = |p: &[T], s: &mut [T], g: &mut [T]| -> T {
            softmax(p, s);
            let mut m = T::zero();
            for k in 0..n {
                g[k] = step * s[k] + p[k] - x[k];
                m = m.max(g[k].abs());
            }
            m
        };
        let tol = T::epsilon() * T::lit(4.0) * T::one().max(crate::scalar::norm_inf(x)).max(step);
        let mut gnorm = residual(&p, &mut s, &mut g);
        for _ in 0..200 {
            if gnorm <= tol {
                break;
            }
            // (D − step s sᵀ)⁻¹ g with D = diag(1 + step s_k)
            let mut sdg = T::zero();
            let mut sds = T::zero();
            for k in 0..n {
                let dk = T::one() + step * s[k];
                sdg += s[k] * g[k] / dk;
                sds += s[k] * s[k] / dk;
            }
            let coef = step * sdg / (T::one() - step * sds);
            for k in 0..n {
                let dk = T::one() + step * s[k];
                d[k] = -(g[k] + coef * s[k]) / dk;
            }
            let f0 = obj(&p);
            let slope: T = g.iter().zip(&d).map(|(&a, &b)| a * b).sum();
            let mut t = T::one();
            let mut st = vec![T::zero(); n];
            let accepted = loop {
                for k in 0..n {
                    trial[k] = p[k] + t * d[k];
                }
                let gn = residual(&trial, &mut st, &mut gt);
                // near the solution the objective test drowns in rounding,
                // so a drop in the residual is accepted too
                let ft = obj(&trial);
                let flat = ft <= f0 + T::lit(64.0) * T::epsilon() * f0.abs().max(T::one());
                if ft <= f0 + T::lit(1e-4) * t * slope || (flat && gn < gnorm) {
                    break Some(gn);
                }
                if t < T::lit(1e-12) {
                    break None;
                }
                t *= half;
            };
            match accepted {
                Some(gn) => {
                    p.copy_from_slice(&trial);
                    s.copy_from_slice(&st);
                    g.copy_from_slice(&gt);
                    gnorm = gn;
                }
                None => break,
            }
        }
        out.copy_from_slice(&p);
        Ok(())
    }

    fn lipschitz(&self) -> Result<T, AtomError> {
        // largest eigenvalue of diag(s) − s sᵀ over the simplex
        Ok(T::lit(0.5))
    }

    // negative entropy on the simplex
    fn conj_value(&self, y: &[T]) -> Option<T> {
        let sum: T = y.iter().copied().sum();
        let nonneg = y.iter().all(|&v| le_tol(-v, T::zero()));
        if !nonneg || !le_tol((sum - T::one()).abs(), T::zero()) {
            return Some(T::infinity());
        }
        Some(y.iter().map(|&v| xlogx(v.max(T::zero()))).sum())
    }

    fn project_conj_domain(&self, y: &[T], out: &mut [T]) -> bool {
        project_simplex(y, out);
        true
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
pub(crate) fn project_simplex<T: Scalar>(y: &[T], out: &mut [T]) {
    let mut u: Vec<T> = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (k, &v) in u.iter().enumerate() {
        cum += v;
        let t = (cum - T::one()) / T::from_usize(k + 1).unwrap_or_else(T::one);
        if v - t > T::zero() {
            theta = t;
        }
    }
    for (o, &v) in out.iter_mut().zip(y) {
        *o = (v - theta).max(T::zero());
    }
}
