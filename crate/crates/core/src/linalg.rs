//! Spectral bounds used by the step-size rules.

use crate::model::CscMatrix;
use crate::scalar::{dot, norm2, Scalar};

pub(crate) const POWER_TOL: f64 = 1e-9;
pub(crate) const POWER_MAX_ITER: usize = 1000;
pub(crate) const POWER_INFLATION: f64 = 1.01;

/// Upper estimate of the largest eigenvalue of a symmetric positive
/// semidefinite operator of size `dim`.
///
/// Exact for `dim == 1`. Otherwise power iteration stopped at relative change
/// `POWER_TOL` (or `POWER_MAX_ITER` steps), then inflated by 1%.
pub fn psd_spectral_radius<T: Scalar>(dim: usize, mut apply: impl FnMut(&[T], &mut [T])) -> T {
    match dim {
        0 => T::zero(),
        1 => {
            let mut out = [T::zero()];
            apply(&[T::one()], &mut out);
            out[0].abs()
        }
        _ => {
            // deterministic start with no special alignment
            let mut v: Vec<T> = (0..dim)
                .map(|k| T::one() + T::lit(0.5 * ((k as f64 + 1.0) * 1.618_033_988_75).sin()))
                .collect();
            let nv = norm2(&v);
            v.iter_mut().for_each(|e| *e /= nv);
            let mut mv = vec![T::zero(); dim];
            let mut est = T::zero();
            for _ in 0..POWER_MAX_ITER {
                apply(&v, &mut mv);
                let rayleigh = dot(&v, &mv);
                let nmv = norm2(&mv);
                if nmv == T::zero() {
                    return T::zero();
                }
                // ‖Mv‖ with ‖v‖ = 1 bounds the Rayleigh quotient from above
                let new = nmv.max(rayleigh);
                let done = (new - est).abs() <= T::lit(POWER_TOL) * new;
                est = new;
                for (a, &b) in v.iter_mut().zip(&mv) {
                    *a = b / nmv;
                }
                if done {
                    break;
                }
            }
            est * T::lit(POWER_INFLATION)
        }
    }
}

/// Spectral radius of a dense symmetric PSD matrix stored row-major.
pub fn dense_psd_radius<T: Scalar>(m: &[T], dim: usize) -> T {
    debug_assert_eq!(m.len(), dim * dim);
    if dim == 1 {
        return m[0].abs();
    }
    psd_spectral_radius(dim, |v, out| {
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(&m[r * dim..(r + 1) * dim], v);
        }
    })
}

/// Largest absolute row sum, an upper bound on the spectral radius.
pub fn gershgorin_bound<T: Scalar>(m: &CscMatrix<T>) -> T {
    let mut rows = vec![T::zero(); m.n_rows()];
    for c in 0..m.n_cols() {
        let (ri, vals) = m.col(c);
        for (&r, &v) in ri.iter().zip(vals) {
            rows[r] += v.abs();
        }
    }
    rows.into_iter().fold(T::zero(), T::max)
}

/// Dense Gram matrix `Σ_r weight(r) · a_r a_rᵀ` of the columns `cols` of
/// `m`, where `a_r` is row `r` restricted to those columns and only rows
/// accepted by `weight` (returning `Some`) contribute.
pub(crate) fn block_gram<T: Scalar>(
    m: &CscMatrix<T>,
    cols: std::ops::Range<usize>,
    mut weight: impl FnMut(usize) -> Option<T>,
) -> Vec<T> {
    let d = cols.len();
    let start = cols.start;
    let mut g = vec![T::zero(); d * d];
    if d == 1 {
        let (rows, vals) = m.col(start);
        for (&r, &v) in rows.iter().zip(vals) {
            if let Some(w) = weight(r) {
                g[0] += w * v * v;
            }
        }
        return g;
    }
    // rows of the column slice, gathered as (row, col offset, value)
    let mut entries: Vec<(usize, usize, T)> = Vec::new();
    for c in cols {
        let (rows, vals) = m.col(c);
        entries.extend(rows.iter().zip(vals).map(|(&r, &v)| (r, c - start, v)));
    }
    entries.sort_by_key(|e| e.0);
    for group in entries.chunk_by(|a, b| a.0 == b.0) {
        let Some(w) = weight(group[0].0) else { continue };
        for &(_, a, va) in group {
            for &(_, b, vb) in group {
                g[a * d + b] += w * va * vb;
            }
        }
    }
    g
}

/// Compressed-row view built once for row-block products.
#[derive(Clone, Debug)]
pub(crate) struct RowView<T> {
    t: CscMatrix<T>,
}

impl<T: Scalar> RowView<T> {
    pub fn new(m: &CscMatrix<T>) -> Self {
        Self { t: m.transpose() }
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        self.t.col(r)
    }

    /// `ρ(A_R A_Rᵀ)` for the rows `rows` of the matrix.
    pub fn rows_gram_radius(&self, rows: std::ops::Range<usize>) -> T {
        let k = rows.len();
        if k == 1 {
            let (_, v) = self.row(rows.start);
            return dot(v, v);
        }
        let base = rows.start;
        let n = self.t.n_rows();
        let mut scratch = vec![T::zero(); n];
        let mut touched: Vec<usize> = Vec::new();
        psd_spectral_radius(k, |u, out| {
            // scratch = A_Rᵀ u, then out = A_R scratch
            for (off, &ur) in u.iter().enumerate() {
                let (cols, vals) = self.row(base + off);
                for (&c, &v) in cols.iter().zip(vals) {
                    if scratch[c] == T::zero() {
                        touched.push(c);
                    }
                    scratch[c] += v * ur;
                }
            }
            for (off, o) in out.iter_mut().enumerate() {
                let (cols, vals) = self.row(base + off);
                *o = cols.iter().zip(vals).map(|(&c, &v)| v * scratch[c]).sum();
            }
            for &c in &touched {
                scratch[c] = T::zero();
            }
            touched.clear();
        })
    }
}
