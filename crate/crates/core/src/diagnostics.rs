//! Objective, feasibility and the smoothed gap used for stopping.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::atoms::{conj_value, prox_conj, Atom, AtomError, Zero};
use crate::model::{Problem, Term};
use crate::scalar::{dot, Scalar};

/// Value of a composite term `Σ_k c_k φ_k(r_k)` at residuals `r = Mx − b`.
fn term_value<T: Scalar>(t: &Term<T>, r: &[T]) -> T {
    let mut v = T::zero();
    for (k, a) in t.atoms.iter().enumerate() {
        let fk = a.value(&r[t.blocks.range(k)]);
        if fk == T::infinity() {
            return T::infinity();
        }
        v += t.weights[k] * fk;
    }
    v
}

fn residual<T: Scalar>(t: &Term<T>, x: &[T]) -> Vec<T> {
    let mut r = t.matrix.mul_vec(x);
    for (a, &b) in r.iter_mut().zip(&t.offset) {
        *a -= b;
    }
    r
}

/// Argument `D_i x⁽ⁱ⁾ − b_i` of the separable atom of block `i`.
pub(crate) fn g_argument<T: Scalar>(p: &Problem<T>, i: usize, x: &[T], out: &mut [T]) {
    let range = p.blocks().range(i);
    let d = p.dg()[i];
    let bg = p.bg();
    for (k, c) in range.enumerate() {
        out[k] = d * x[c] - if bg.is_empty() { T::zero() } else { bg[c] };
    }
}

/// `G(x) = Σ_i c_i g_i(D_i x⁽ⁱ⁾ − b_i)`.
pub fn g_value<T: Scalar>(p: &Problem<T>, x: &[T]) -> T {
    if !p.has_g() {
        return T::zero();
    }
    let mut buf = vec![T::zero(); p.blocks().max_size()];
    let mut v = T::zero();
    for i in 0..p.n_blocks() {
        let n = p.blocks().size(i);
        g_argument(p, i, x, &mut buf[..n]);
        let gi = p.g_atoms()[i].value(&buf[..n]);
        if gi == T::infinity() {
            return T::infinity();
        }
        v += p.cg()[i] * gi;
    }
    v
}

pub fn quad_value<T: Scalar>(p: &Problem<T>, x: &[T]) -> T {
    match p.q() {
        Some(q) => T::lit(0.5) * dot(x, &q.mul_vec(x)),
        None => T::zero(),
    }
}

/// Objective value at `x`; `+∞` when an indicator is violated.
pub fn primal_objective<T: Scalar>(p: &Problem<T>, x: &[T]) -> T {
    let parts = [
        quad_value(p, x),
        term_value(p.f(), &residual(p.f(), x)),
        g_value(p, x),
        term_value(p.h(), &residual(p.h(), x)),
    ];
    if parts.iter().any(|v| *v == T::infinity()) {
        return T::infinity();
    }
    parts.into_iter().sum()
}

/// Euclidean distance from `A_h x` to `dom H`, i.e. from `A_h x − b_h` to
/// the product of the atom domains.
pub fn infeasibility<T: Scalar>(p: &Problem<T>, x: &[T]) -> T {
    let h = p.h();
    if h.is_empty() {
        return T::zero();
    }
    let r = residual(h, x);
    let mut proj = vec![T::zero(); r.len()];
    let mut s = T::zero();
    for (l, a) in h.atoms.iter().enumerate() {
        let rows = h.blocks.range(l);
        a.project_domain(&r[rows.clone()], &mut proj[rows.clone()]);
        for k in rows {
            s += (r[k] - proj[k]) * (r[k] - proj[k]);
        }
    }
    s.sqrt()
}

/// `(ζ, ω) = (∇f(A_f x), Qx)` where `f(z) = Σ c_j f_j(z_j − b_j)`.
pub fn dual_smooth_point<T: Scalar>(p: &Problem<T>, x: &[T]) -> Result<(Vec<T>, Vec<T>), AtomError> {
    let f = p.f();
    let r = residual(f, x);
    let mut zeta = vec![T::zero(); r.len()];
    for (j, a) in f.atoms.iter().enumerate() {
        let rows = f.blocks.range(j);
        a.gradient(&r[rows.clone()], &mut zeta[rows.clone()])?;
        for z in &mut zeta[rows] {
            *z *= f.weights[j];
        }
    }
    let omega = match p.q() {
        Some(q) => q.mul_vec(x),
        None => vec![T::zero(); p.n()],
    };
    Ok((zeta, omega))
}

/// `v = −A_hᵀy − A_fᵀζ − ω`; an empty `y` drops the `h` part.
pub(crate) fn dual_primal_image<T: Scalar>(p: &Problem<T>, y: &[T], zeta: &[T], omega: &[T]) -> Vec<T> {
    let mut v = vec![T::zero(); p.n()];
    if !p.h().is_empty() && !y.is_empty() {
        for (a, b) in v.iter_mut().zip(p.h().matrix.tr_mul_vec(y)) {
            *a -= b;
        }
    }
    if !p.f().is_empty() {
        for (a, b) in v.iter_mut().zip(p.f().matrix.tr_mul_vec(zeta)) {
            *a -= b;
        }
    }
    for (a, &b) in v.iter_mut().zip(omega) {
        *a -= b;
    }
    v
}

/// Separable atom, weight, scaling and offset of block `i`, with the zero
/// function standing in when `G` is absent.
fn g_parts<'a, T: Scalar>(p: &'a Problem<T>, i: usize, zero: &'a Zero) -> (&'a dyn Atom<T>, T, T, &'a [T]) {
    let range = p.blocks().range(i);
    if p.has_g() {
        (&*p.g_atoms()[i], p.cg()[i], p.dg()[i], &p.bg()[range])
    } else {
        (zero, T::one(), p.dg()[i], &[])
    }
}

fn offset_at<T: Scalar>(b: &[T], k: usize) -> T {
    b.get(k).copied().unwrap_or_else(T::zero)
}

/// `G_i*(v) = c g*(v/(cD)) + ⟨b, v⟩/D`, summed over blocks.
pub fn g_conj_value<T: Scalar>(p: &Problem<T>, v: &[T]) -> Result<T, AtomError> {
    let zero = Zero;
    let mut total = T::zero();
    let mut buf = vec![T::zero(); p.blocks().max_size()];
    for i in 0..p.n_blocks() {
        let (atom, c, d, b) = g_parts(p, i, &zero);
        let range = p.blocks().range(i);
        let n = range.len();
        let mut lin = T::zero();
        for (k, col) in range.enumerate() {
            buf[k] = v[col] / (c * d);
            lin += offset_at(b, k) * v[col];
        }
        let gc = conj_value(atom, &buf[..n])?;
        if gc == T::infinity() {
            return Ok(T::infinity());
        }
        total += c * gc + lin / d;
    }
    Ok(total)
}

/// `Σ c φ*(ζ/c) + ⟨b, ζ⟩` for a composite term.
pub fn term_conj_value<T: Scalar>(t: &Term<T>, y: &[T]) -> Result<T, AtomError> {
    let mut total = T::zero();
    for (k, a) in t.atoms.iter().enumerate() {
        let rows = t.blocks.range(k);
        let c = t.weights[k];
        let scaled: Vec<T> = y[rows.clone()].iter().map(|&v| v / c).collect();
        let fc = conj_value(&**a, &scaled)?;
        if fc == T::infinity() {
            return Ok(T::infinity());
        }
        total += c * fc + dot(&t.offset[rows.clone()], &y[rows]);
    }
    Ok(total)
}

/// Distance from `v` to `dom G*`, block by block. Blocks whose atom cannot
/// project fall back to `‖v_i‖`.
pub fn dist_conj_domain<T: Scalar>(p: &Problem<T>, v: &[T]) -> T {
    let zero = Zero;
    let mut s = T::zero();
    let mut buf = vec![T::zero(); p.blocks().max_size()];
    let mut proj = buf.clone();
    for i in 0..p.n_blocks() {
        let (atom, c, d, _) = g_parts(p, i, &zero);
        let range = p.blocks().range(i);
        let n = range.len();
        let cd = c * d;
        for (k, col) in range.clone().enumerate() {
            buf[k] = v[col] / cd;
        }
        if atom.project_conj_domain(&buf[..n], &mut proj[..n]) {
            for k in 0..n {
                let e = (buf[k] - proj[k]) * cd;
                s += e * e;
            }
        } else {
            for col in range {
                s += v[col] * v[col];
            }
        }
    }
    s.sqrt()
}

/// `s = max(1, max_i σ°_{dom G_i*}(−(A_fᵀζ + ω)_i))`, or `None` when some
/// block has no polar available.
pub fn dual_scaling<T: Scalar>(p: &Problem<T>, zeta: &[T], omega: &[T]) -> Option<T> {
    let zero = Zero;
    let v = dual_primal_image(p, &[], zeta, omega);
    let mut s = T::one();
    let mut buf = vec![T::zero(); p.blocks().max_size()];
    for i in 0..p.n_blocks() {
        let (atom, c, d, _) = g_parts(p, i, &zero);
        let range = p.blocks().range(i);
        let n = range.len();
        for (k, col) in range.enumerate() {
            buf[k] = v[col] / (c * d);
        }
        s = s.max(atom.conj_domain_polar(&buf[..n])?);
    }
    Some(s)
}

/// Duality gap for problems without `h`, at dual point `(ζ̄, ω̄) = (ζ, ω)/s`:
/// `½xᵀQx + f(A_f x) + G(x) + G*(−A_fᵀζ̄ − ω̄) + xᵀQx/(2s²) + f*(ζ̄)`.
pub fn gap_value<T: Scalar>(p: &Problem<T>, x: &[T], zeta_bar: &[T], omega_bar: &[T], s: T) -> Result<T, AtomError> {
    let quad = quad_value(p, x);
    let fv = term_value(p.f(), &residual(p.f(), x));
    let gv = g_value(p, x);
    let v = dual_primal_image(p, &[], zeta_bar, omega_bar);
    let gc = g_conj_value(p, &v)?;
    let fc = term_conj_value(p.f(), zeta_bar)?;
    let parts = [quad, fv, gv, gc, quad / (s * s), fc];
    if parts.iter().any(|v| *v == T::infinity()) {
        return Ok(T::infinity());
    }
    Ok(parts.into_iter().sum())
}

/// Smoothed gap `𝒢_{β,γ}(x, y, ζ, ω)` with `ω = Qx/s` (so `½ωᵀQ†ω = xᵀQx/(2s²)`).
#[allow(clippy::too_many_arguments)]
pub fn smoothed_gap<T: Scalar>(
    p: &Problem<T>,
    x: &[T],
    y: &[T],
    zeta: &[T],
    omega: &[T],
    s: T,
    beta: T,
    gamma: T,
) -> Result<T, AtomError> {
    let quad = quad_value(p, x);
    let fv = term_value(p.f(), &residual(p.f(), x));
    let gv = g_value(p, x);
    let hy = smoothed_h(p, x, y, beta)?;
    let hc = term_conj_value(p.h(), y)?;
    let fc = term_conj_value(p.f(), zeta)?;
    let v = dual_primal_image(p, y, zeta, omega);
    let gx = smoothed_g_conj(p, x, &v, gamma)?;
    let parts = [quad, fv, gv, hy, hc, quad / (s * s), fc, gx];
    if parts.iter().any(|v| *v == T::infinity()) {
        return Ok(T::infinity());
    }
    Ok(parts.into_iter().sum())
}

/// `max_{y'} ⟨A_h x, y'⟩ − H*(y') − (β/2)‖y − y'‖²`.
fn smoothed_h<T: Scalar>(p: &Problem<T>, x: &[T], y: &[T], beta: T) -> Result<T, AtomError> {
    let h = p.h();
    if h.is_empty() {
        return Ok(T::zero());
    }
    let u = h.matrix.mul_vec(x);
    let mut total = T::zero();
    for (l, a) in h.atoms.iter().enumerate() {
        let rows = h.blocks.range(l);
        let c = h.weights[l];
        let b = &h.offset[rows.clone()];
        if beta <= T::zero() {
            let arg: Vec<T> = u[rows.clone()].iter().zip(b).map(|(&a, &b)| a - b).collect();
            let v = a.value(&arg);
            if v == T::infinity() {
                return Ok(T::infinity());
            }
            total += c * v;
            continue;
        }
        // p = prox_{βH}(u + βy) = b + prox_{βc h}(u + βy − b)
        let arg: Vec<T> = rows
            .clone()
            .map(|k| u[k] + beta * y[k] - h.offset[k])
            .collect();
        let mut q = vec![T::zero(); arg.len()];
        a.prox(&arg, beta * c, &mut q)?;
        let hv = a.value(&q);
        if hv == T::infinity() {
            return Ok(T::infinity());
        }
        let mut inner = T::zero();
        let mut sq = T::zero();
        for (k, row) in rows.enumerate() {
            let pk = b[k] + q[k];
            let yp = (u[row] + beta * y[row] - pk) / beta;
            let diff = y[row] - yp;
            inner += diff * yp;
            sq += diff * diff;
        }
        total += c * hv - beta * inner - T::lit(0.5) * beta * sq;
    }
    Ok(total)
}

/// `max_{x'} ⟨v, x'⟩ − G(x') − (γ/2)‖x − x'‖²`, equal to `G*(v)` at `γ = 0`.
fn smoothed_g_conj<T: Scalar>(p: &Problem<T>, x: &[T], v: &[T], gamma: T) -> Result<T, AtomError> {
    let vnorm = crate::scalar::norm2(v);
    if gamma <= T::lit(1e-12) * T::one().max(vnorm) {
        return g_conj_value(p, v);
    }
    let zero = Zero;
    let mut total = T::zero();
    for i in 0..p.n_blocks() {
        let (atom, c, d, b) = g_parts(p, i, &zero);
        let range = p.blocks().range(i);
        // x' = D⁻¹(b + prox_{cD²/γ g}(D(x + v/γ) − b))
        let arg: Vec<T> = range
            .clone()
            .enumerate()
            .map(|(k, col)| d * (x[col] + v[col] / gamma) - offset_at(b, k))
            .collect();
        let mut q = vec![T::zero(); arg.len()];
        atom.prox(&arg, c * d * d / gamma, &mut q)?;
        let gv = atom.value(&q);
        if gv == T::infinity() {
            return Ok(T::infinity());
        }
        let mut lin = T::zero();
        let mut sq = T::zero();
        for (k, col) in range.enumerate() {
            let xp = (offset_at(b, k) + q[k]) / d;
            lin += v[col] * xp;
            sq += (x[col] - xp) * (x[col] - xp);
        }
        total += lin - c * gv - T::lit(0.5) * gamma * sq;
    }
    Ok(total)
}

/// `prox_{σH*}(v)` on the rows of h-block `l`, `σ` being that block's step:
/// `v − σ(b + prox_{(c/σ)h}(v/σ − b))`.
pub(crate) fn h_conj_prox<T: Scalar>(
    p: &Problem<T>,
    l: usize,
    v: &[T],
    sigma: T,
    shifted: &mut [T],
    out: &mut [T],
) -> Result<(), AtomError> {
    let h = p.h();
    let rows = h.blocks.range(l);
    for (k, row) in rows.enumerate() {
        shifted[k] = v[k] - sigma * h.offset[row];
    }
    prox_conj(&*h.atoms[l], shifted, sigma, h.weights[l], out)
}

/// Dual estimate `prox_{σH*}(z + σ A_h x)` over every row, one step per h-block.
pub fn dual_estimate<T: Scalar>(p: &Problem<T>, base: &[T], ax: &[T], sigma: impl Fn(usize) -> T, scale_ax: bool) -> Result<Vec<T>, AtomError> {
    let h = p.h();
    let mut out = vec![T::zero(); h.dim()];
    let width = (0..h.len()).map(|l| h.blocks.size(l)).max().unwrap_or(0);
    let mut v = vec![T::zero(); width];
    let mut shifted = vec![T::zero(); width];
    for l in 0..h.len() {
        let rows = h.blocks.range(l);
        let n = rows.len();
        let s = sigma(l);
        for (k, row) in rows.clone().enumerate() {
            v[k] = base[row] + if scale_ax { s * ax[row] } else { ax[row] };
        }
        h_conj_prox(p, l, &v[..n], s, &mut shifted[..n], &mut out[rows])?;
    }
    Ok(out)
}

/// Everything reported at a checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapReport<T> {
    pub objective: T,
    pub gap: T,
    pub beta: T,
    pub gamma: T,
    pub infeasibility: T,
}

impl<T: Scalar> GapReport<T> {
    /// `max(𝒢, β, γ) ≤ tol`.
    pub fn within(&self, tol: T) -> bool {
        self.gap.abs() <= tol && self.beta <= tol && self.gamma <= tol
    }
}

/// Smoothed gap at `(x, y)` with the default choices: `(ζ, ω) = (∇f(A_f x), Qx)`,
/// rescaled when `h` is absent, `β = dist(A_h x, dom H)` and
/// `γ = dist(−A_hᵀy − A_fᵀζ − ω, dom G*)`.
pub fn evaluate<T: Scalar>(p: &Problem<T>, x: &[T], y: &[T]) -> Result<GapReport<T>, AtomError> {
    let objective = primal_objective(p, x);
    let (mut zeta, mut omega) = dual_smooth_point(p, x)?;
    let mut s = T::one();
    if !p.has_h() {
        if let Some(sc) = dual_scaling(p, &zeta, &omega).filter(|v| v.is_finite()) {
            s = sc;
            zeta.iter_mut().for_each(|z| *z /= s);
            omega.iter_mut().for_each(|w| *w /= s);
        }
    }
    let beta = infeasibility(p, x);
    let v = dual_primal_image(p, y, &zeta, &omega);
    let gamma = dist_conj_domain(p, &v);
    let gap = smoothed_gap(p, x, y, &zeta, &omega, s, beta, gamma)?;
    Ok(GapReport {
        objective,
        gap,
        beta,
        gamma,
        infeasibility: beta,
    })
}

/// One checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: u64,
    pub elapsed: f64,
    pub objective: f64,
    pub gap: f64,
    pub beta: f64,
    pub gamma: f64,
    pub infeasibility: f64,
    pub screened: u64,
}

/// Checkpoint history of a run. CSV columns, in order:
/// `epoch,elapsed,objective,gap,beta,gamma,infeasibility,screened`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn push(&mut self, row: TraceRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.epoch < row.epoch));
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wr.write_record([
                "epoch",
                "elapsed",
                "objective",
                "gap",
                "beta",
                "gamma",
                "infeasibility",
                "screened",
            ])?;
        }
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.rows)
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let file = std::fs::File::create(path)?;
        if is_json {
            serde_json::to_writer_pretty(file, &self.rows).map_err(io::Error::other)
        } else {
            self.write_csv(file).map_err(io::Error::other)
        }
    }
}
