//! Gap Safe screening for problems without `h`.
//!
//! At optimality `−(A_iᵀζ* + ω*_i) ∈ ∂G_i(x*_i)` where `(ζ*, ω*) = (∇f(A_f x*), Qx*)`
//! is the unique dual solution. A ball of radius `r = √(2·L·Gap)` around any
//! rescaled dual-feasible point contains `(ζ*, ω*)`, `L` being a Lipschitz
//! constant of `(∇f, Q)` (the dual objective is `1/L`-strongly concave). If
//! every point of the ball maps into the interior of `∂G_i(x̂)` at a kink
//! `x̂`, block `i` equals `x̂` at every solution.

use crate::atoms::{Atom, AtomError};
use crate::diagnostics::{dual_primal_image, dual_scaling, dual_smooth_point, g_argument, gap_value, primal_objective};
use crate::linalg::{block_gram, dense_psd_radius, gershgorin_bound};
use crate::model::Problem;
use crate::scalar::Scalar;

/// Precomputed constants and the active mask.
#[derive(Clone, Debug)]
pub struct Screener<T> {
    lipschitz: T,
    /// Upper bound on the norm of `(ζ, ω) ↦ A_iᵀζ + ω_i`, per block.
    opnorm: Vec<T>,
    active: Vec<bool>,
    last_gap: Option<T>,
    last_radius: Option<T>,
}

/// Outcome of one screening round.
#[derive(Clone, Debug, Default)]
pub struct ScreenRound<T> {
    /// Newly fixed blocks with their final values.
    pub fixed: Vec<(usize, Vec<T>)>,
    pub gap: Option<T>,
    pub radius: Option<T>,
}

impl<T: Scalar> Screener<T> {
    /// `None` when the problem has an `h` term or no separable term.
    pub fn new(p: &Problem<T>) -> Result<Option<Self>, AtomError> {
        if p.has_h() || !p.has_g() {
            return Ok(None);
        }
        let f = p.f();
        let mut lf = T::zero();
        for (j, a) in f.atoms.iter().enumerate() {
            lf = lf.max(f.weights[j] * a.lipschitz()?);
        }
        let lq = p.q().map_or(T::zero(), gershgorin_bound);
        let has_q = p.q().is_some();
        let opnorm = (0..p.n_blocks())
            .map(|i| {
                let a2 = if f.is_empty() {
                    T::zero()
                } else {
                    let range = p.blocks().range(i);
                    let d = range.len();
                    dense_psd_radius(&block_gram(&f.matrix, range, |_| Some(T::one())), d)
                };
                if has_q {
                    (a2 + T::one()).sqrt()
                } else {
                    a2.sqrt()
                }
            })
            .collect();
        Ok(Some(Self {
            lipschitz: lf.max(lq),
            opnorm,
            active: vec![true; p.n_blocks()],
            last_gap: None,
            last_radius: None,
        }))
    }

    pub fn lipschitz(&self) -> T {
        self.lipschitz
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    pub fn n_screened(&self) -> usize {
        self.active.iter().filter(|a| !**a).count()
    }

    pub fn screened_mask(&self) -> Vec<bool> {
        self.active.iter().map(|a| !a).collect()
    }

    pub fn last_gap(&self) -> Option<T> {
        self.last_gap
    }

    pub fn last_radius(&self) -> Option<T> {
        self.last_radius
    }

    /// Safe radius for a given gap.
    pub fn radius(&self, gap: T) -> T {
        (T::lit(2.0) * self.lipschitz * gap.max(T::zero())).sqrt()
    }

    /// Tests every active block at `x`; passing blocks are marked inactive
    /// and returned with their kink values.
    pub fn screen(&mut self, p: &Problem<T>, x: &[T]) -> Result<ScreenRound<T>, AtomError> {
        let (zeta, omega) = dual_smooth_point(p, x)?;
        let Some(s) = dual_scaling(p, &zeta, &omega).filter(|v| v.is_finite()) else {
            return Ok(ScreenRound::default());
        };
        let zeta_bar: Vec<T> = zeta.iter().map(|&z| z / s).collect();
        let omega_bar: Vec<T> = omega.iter().map(|&w| w / s).collect();
        let gap = gap_value(p, x, &zeta_bar, &omega_bar, s)?;
        if !gap.is_finite() {
            self.last_gap = None;
            self.last_radius = None;
            return Ok(ScreenRound::default());
        }
        // the gap is a difference of values of size |P(x)|; below that
        // rounding level it carries no information
        let floor = T::lit(64.0) * T::epsilon() * (T::one() + primal_objective(p, x).abs());
        let r = self.radius(gap.max(T::zero()) + floor);
        self.last_gap = Some(gap);
        self.last_radius = Some(r);
        let v = dual_primal_image(p, &[], &zeta_bar, &omega_bar);
        let width = p.blocks().max_size();
        let mut arg = vec![T::zero(); width];
        let mut anchor = vec![T::zero(); width];
        let mut u = vec![T::zero(); width];
        let mut fixed = Vec::new();
        for i in 0..p.n_blocks() {
            if !self.active[i] {
                continue;
            }
            let range = p.blocks().range(i);
            let n = range.len();
            let atom: &dyn Atom<T> = &*p.g_atoms()[i];
            g_argument(p, i, x, &mut arg[..n]);
            let Some(polar) = atom.kink_anchor(&arg[..n], &mut anchor[..n]) else {
                continue;
            };
            let cd = p.cg()[i] * p.dg()[i];
            for (k, col) in range.clone().enumerate() {
                u[k] = v[col] / cd;
            }
            let bound = polar.ball_upper_bound(&u[..n], r * self.opnorm[i] / cd.abs());
            if bound < T::one() {
                let d = p.dg()[i];
                let values = range
                    .enumerate()
                    .map(|(k, col)| (p.bg()[col] + anchor[k]) / d)
                    .collect();
                self.active[i] = false;
                fixed.push((i, values));
            }
        }
        Ok(ScreenRound {
            fixed,
            gap: Some(gap),
            radius: Some(r),
        })
    }
}
