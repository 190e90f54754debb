//! Iterate storage with incrementally maintained residuals.

use crate::atoms::AtomError;
use crate::model::Problem;
use crate::scalar::Scalar;

/// Per-problem lookup tables for partial gradients.
#[derive(Clone, Debug)]
pub(crate) struct GradTables {
    /// f-blocks touched by each primal block, CSR-style.
    fblk_ptr: Vec<usize>,
    fblk: Vec<usize>,
    /// f-blocks using the square atom on a single row.
    is_square: Vec<bool>,
}

impl GradTables {
    pub fn new<T: Scalar>(p: &Problem<T>) -> Self {
        let f = p.f();
        let mut fblk_ptr = vec![0];
        let mut fblk = Vec::new();
        let mut seen = vec![usize::MAX; f.blocks.len()];
        for i in 0..p.n_blocks() {
            let start = fblk.len();
            for c in p.blocks().range(i) {
                if f.is_empty() {
                    break;
                }
                for &r in f.matrix.col(c).0 {
                    let j = f.blocks.owner(r);
                    if seen[j] != i {
                        seen[j] = i;
                        fblk.push(j);
                    }
                }
            }
            fblk[start..].sort_unstable();
            fblk_ptr.push(fblk.len());
        }
        let is_square = (0..f.len())
            .map(|j| f.atoms[j].name() == "square" && f.blocks.size(j) == 1)
            .collect();
        Self {
            fblk_ptr,
            fblk,
            is_square,
        }
    }

    #[inline]
    pub fn fblocks_of_block(&self, i: usize) -> &[usize] {
        &self.fblk[self.fblk_ptr[i]..self.fblk_ptr[i + 1]]
    }
}

/// `∇_i F` from residuals: `r_f = A_f x − b_f` (only rows of the f-blocks
/// touching block `i` are read) and `q_at(c) = (Qx)_c`.
///
/// `gbuf` is scratch of length `M_f`. With `bypass`, single-row square blocks
/// skip the atom call; the arithmetic is the same as the atom's.
#[allow(clippy::too_many_arguments)]
pub(crate) fn block_gradient<T: Scalar>(
    p: &Problem<T>,
    tables: &GradTables,
    i: usize,
    r_f: &[T],
    q_at: impl Fn(usize) -> T,
    gbuf: &mut [T],
    out: &mut [T],
    bypass: bool,
) -> Result<(), AtomError> {
    let range = p.blocks().range(i);
    let start = range.start;
    if p.q().is_some() {
        for c in range.clone() {
            out[c - start] = q_at(c);
        }
    } else {
        out.fill(T::zero());
    }
    let f = p.f();
    if f.is_empty() {
        return Ok(());
    }
    for &j in tables.fblocks_of_block(i) {
        let rows = f.blocks.range(j);
        if bypass && tables.is_square[j] {
            let r = rows.start;
            gbuf[r] = (T::one() + T::one()) * r_f[r];
        } else {
            f.atoms[j].gradient(&r_f[rows.clone()], &mut gbuf[rows])?;
        }
    }
    for c in range {
        let (rows, vals) = f.matrix.col(c);
        let mut acc = out[c - start];
        for (&r, &v) in rows.iter().zip(vals) {
            acc += f.weights[f.blocks.owner(r)] * (v * gbuf[r]);
        }
        out[c - start] = acc;
    }
    Ok(())
}

/// Iterate of the primal-dual method with its residuals.
///
/// Invariants (up to round-off drift, see [`SolverState::refresh_residuals`]):
/// `r_f = A_f x − b_f`, `r_q = Qx`, `r_h = A_h x`,
/// `z_j = (1/m_j) Σ_i y_j(i)` and `w_c = Σ_j (A_h)_{jc} y_j(block of c)`.
#[derive(Clone, Debug)]
pub struct SolverState<T: Scalar> {
    pub x: Vec<T>,
    /// Duplicated dual variables.
    pub y: Vec<T>,
    pub w: Vec<T>,
    pub z: Vec<T>,
    pub r_f: Vec<T>,
    /// `Qx`; empty when the problem has no quadratic term.
    pub r_q: Vec<T>,
    pub r_h: Vec<T>,
    /// Use the inline square gradient instead of the atom call.
    pub square_bypass: bool,
    tables: GradTables,
    gbuf: Vec<T>,
    dbuf: Vec<T>,
    residual_writes: u64,
}

impl<T: Scalar> SolverState<T> {
    /// State at the problem's initial point.
    pub fn new(p: &Problem<T>) -> Self {
        let y = p
            .y_init()
            .map(<[T]>::to_vec)
            .unwrap_or_else(|| vec![T::zero(); p.duplication().len()]);
        Self::at(p, p.x_init().to_vec(), y)
    }

    /// State at a given primal point and duplicated dual vector.
    pub fn at(p: &Problem<T>, x: Vec<T>, y: Vec<T>) -> Self {
        assert_eq!(x.len(), p.n());
        assert_eq!(y.len(), p.duplication().len());
        let mut s = Self {
            x,
            y,
            w: vec![T::zero(); p.n()],
            z: vec![T::zero(); p.h().dim()],
            r_f: vec![T::zero(); p.f().dim()],
            r_q: if p.q().is_some() {
                vec![T::zero(); p.n()]
            } else {
                Vec::new()
            },
            r_h: vec![T::zero(); p.h().dim()],
            square_bypass: true,
            tables: GradTables::new(p),
            gbuf: vec![T::zero(); p.f().dim()],
            dbuf: vec![T::zero(); p.duplication().len()],
            residual_writes: 0,
        };
        s.refresh_residuals(p);
        s
    }

    /// Number of residual entries written by [`Self::apply_primal_update`].
    pub fn residual_writes(&self) -> u64 {
        self.residual_writes
    }

    /// `∇_i F(x)` into `out` (length of block `i`).
    pub fn partial_gradient(&mut self, p: &Problem<T>, i: usize, out: &mut [T]) -> Result<(), AtomError> {
        let r_q = &self.r_q;
        block_gradient(
            p,
            &self.tables,
            i,
            &self.r_f,
            |c| r_q[c],
            &mut self.gbuf,
            out,
            self.square_bypass,
        )
    }

    /// Replaces block `i` of `x` and updates the residuals from the columns
    /// of that block only.
    pub fn apply_primal_update(&mut self, p: &Problem<T>, i: usize, x_new: &[T]) {
        let range = p.blocks().range(i);
        let start = range.start;
        for c in range {
            let d = x_new[c - start] - self.x[c];
            if d == T::zero() {
                continue;
            }
            self.x[c] = x_new[c - start];
            self.residual_writes += add_column(&p.f().matrix, c, d, &mut self.r_f);
            if let Some(q) = p.q() {
                self.residual_writes += add_column(q, c, d, &mut self.r_q);
            }
            self.residual_writes += add_column(&p.h().matrix, c, d, &mut self.r_h);
        }
    }

    /// Sets every copy owned by block `i` to `ybar[row]` and updates `w` and
    /// `z`. `ybar` is indexed by row of `A_h`; only the rows touched by
    /// block `i` are read.
    pub fn apply_dual_update(&mut self, p: &Problem<T>, i: usize, ybar: &[T]) {
        let dup = p.duplication();
        let range = dup.dual_vars_to_update(i);
        if range.is_empty() {
            return;
        }
        let base = range.start;
        for d in range {
            let j = dup.dup_row(d);
            let delta = ybar[j] - self.y[d];
            self.dbuf[d - base] = delta;
            if delta != T::zero() {
                self.y[d] = ybar[j];
                self.z[j] += delta / T::from_usize(dup.m(j)).expect("count");
            }
        }
        let ah = &p.h().matrix;
        for c in p.blocks().range(i) {
            let lo = ah.col_ptr()[c];
            let (_, vals) = ah.col(c);
            let mut acc = T::zero();
            for (k, &v) in vals.iter().enumerate() {
                acc += v * self.dbuf[dup.nz_dup(lo + k) - base];
            }
            self.w[c] += acc;
        }
    }

    /// Recomputes residuals and aggregates from `x` and `y`; returns the
    /// largest absolute correction.
    pub fn refresh_residuals(&mut self, p: &Problem<T>) -> T {
        let mut drift = T::zero();
        let mut set = |dst: &mut Vec<T>, src: Vec<T>| {
            for (a, b) in dst.iter_mut().zip(src) {
                drift = drift.max((*a - b).abs());
                *a = b;
            }
        };
        let f = p.f();
        let mut rf = f.matrix.mul_vec(&self.x);
        for (r, &b) in rf.iter_mut().zip(&f.offset) {
            *r -= b;
        }
        set(&mut self.r_f, rf);
        if let Some(q) = p.q() {
            set(&mut self.r_q, q.mul_vec(&self.x));
        }
        set(&mut self.r_h, p.h().matrix.mul_vec(&self.x));
        let (w, z) = dual_aggregates(p, &self.y);
        set(&mut self.w, w);
        set(&mut self.z, z);
        drift
    }
}

/// `(w, z)` defined by the duplicated vector `y`.
pub fn dual_aggregates<T: Scalar>(p: &Problem<T>, y: &[T]) -> (Vec<T>, Vec<T>) {
    let dup = p.duplication();
    let ah = &p.h().matrix;
    let mut z = vec![T::zero(); ah.n_rows()];
    for (d, &v) in y.iter().enumerate() {
        z[dup.dup_row(d)] += v;
    }
    for (j, zj) in z.iter_mut().enumerate() {
        if dup.m(j) > 0 {
            *zj /= T::from_usize(dup.m(j)).expect("count");
        }
    }
    let mut w = vec![T::zero(); p.n()];
    for (c, wc) in w.iter_mut().enumerate() {
        let lo = ah.col_ptr()[c];
        let (_, vals) = ah.col(c);
        *wc = vals
            .iter()
            .enumerate()
            .map(|(k, &v)| v * y[dup.nz_dup(lo + k)])
            .fold(T::zero(), |a, b| a + b);
    }
    (w, z)
}

/// `r += d · M[:, c]`; returns the number of entries written.
#[inline]
pub(crate) fn add_column<T: Scalar>(
    m: &crate::model::CscMatrix<T>,
    c: usize,
    d: T,
    r: &mut [T],
) -> u64 {
    let (rows, vals) = m.col(c);
    for (&row, &v) in rows.iter().zip(vals) {
        r[row] += v * d;
    }
    rows.len() as u64
}
