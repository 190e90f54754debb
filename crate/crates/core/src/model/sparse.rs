//! Compressed sparse column storage.

use std::ops::Range;

use super::{BlockStructure, ModelError};
use crate::scalar::Scalar;

/// Sparse matrix in compressed column format.
///
/// Explicitly stored zeros are kept: they count as structural nonzeros.
#[derive(Clone, Debug, PartialEq)]
pub struct CscMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

/// One structural nonzero of a column block, with the row block owning it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockEntry<T> {
    pub row_block: usize,
    pub row: usize,
    pub col: usize,
    pub value: T,
}

impl<T: Scalar> CscMatrix<T> {
    /// Validates raw compressed-column arrays.
    pub fn try_new(
        n_rows: usize,
        n_cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self, ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidMatrix(msg));
        if col_ptr.len() != n_cols + 1 {
            return bad(format!("col_ptr has length {}, expected {}", col_ptr.len(), n_cols + 1));
        }
        if col_ptr[0] != 0 {
            return bad("col_ptr must start at 0".into());
        }
        if col_ptr.windows(2).any(|w| w[0] > w[1]) {
            return bad("col_ptr must be nondecreasing".into());
        }
        let nnz = col_ptr[n_cols];
        if row_idx.len() != nnz || values.len() != nnz {
            return bad(format!(
                "row_idx ({}) and values ({}) must both have length col_ptr[n_cols] = {nnz}",
                row_idx.len(),
                values.len()
            ));
        }
        for c in 0..n_cols {
            let rows = &row_idx[col_ptr[c]..col_ptr[c + 1]];
            if rows.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row indices of column {c} are not strictly increasing"));
            }
            if let Some(&r) = rows.last() {
                if r >= n_rows {
                    return bad(format!("row index {r} out of range in column {c}"));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return bad("matrix has non-finite entries".into());
        }
        Ok(Self {
            n_rows,
            n_cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            col_ptr: vec![0; n_cols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds from a row-major dense matrix, dropping zeros.
    pub fn from_dense(n_rows: usize, n_cols: usize, rows: &[Vec<T>]) -> Result<Self, ModelError> {
        if rows.len() != n_rows || rows.iter().any(|r| r.len() != n_cols) {
            return Err(ModelError::InvalidMatrix(format!(
                "dense matrix is not {n_rows}x{n_cols}"
            )));
        }
        let mut col_ptr = Vec::with_capacity(n_cols + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for c in 0..n_cols {
            for (r, row) in rows.iter().enumerate() {
                if row[c] != T::zero() {
                    row_idx.push(r);
                    values.push(row[c]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self::try_new(n_rows, n_cols, col_ptr, row_idx, values)
    }

    /// Builds from coordinate triplets; duplicates are summed, explicit zeros kept.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Result<Self, ModelError> {
        let mut t: Vec<(usize, usize, T)> = triplets.to_vec();
        if let Some(&(r, c, _)) = t.iter().find(|&&(r, c, _)| r >= n_rows || c >= n_cols) {
            return Err(ModelError::InvalidMatrix(format!(
                "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
            )));
        }
        t.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut col_ptr = vec![0; n_cols + 1];
        let mut row_idx: Vec<usize> = Vec::with_capacity(t.len());
        let mut values: Vec<T> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self::try_new(n_rows, n_cols, col_ptr, row_idx, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Row indices and values of column `c`.
    #[inline]
    pub fn col(&self, c: usize) -> (&[usize], &[T]) {
        let r = self.col_ptr[c]..self.col_ptr[c + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    /// Range of positions in `row_idx`/`values` covering columns `cols`.
    #[inline]
    pub fn nz_range(&self, cols: Range<usize>) -> Range<usize> {
        self.col_ptr[cols.start]..self.col_ptr[cols.end]
    }

    /// Structural nonzeros of the columns in `cols`, attributed to the row
    /// blocks of `row_blocks`.
    pub fn column_block<'a>(
        &'a self,
        cols: Range<usize>,
        row_blocks: &'a BlockStructure,
    ) -> impl Iterator<Item = BlockEntry<T>> + 'a {
        cols.flat_map(move |c| {
            let (rows, vals) = self.col(c);
            rows.iter().zip(vals).map(move |(&r, &v)| BlockEntry {
                row_block: row_blocks.owner(r),
                row: r,
                col: c,
                value: v,
            })
        })
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n_rows];
        for (c, &xc) in x.iter().enumerate().take(self.n_cols) {
            if xc == T::zero() {
                continue;
            }
            let (rows, vals) = self.col(c);
            for (&r, &v) in rows.iter().zip(vals) {
                y[r] += v * xc;
            }
        }
        y
    }

    /// `x = Mᵀ y`.
    pub fn tr_mul_vec(&self, y: &[T]) -> Vec<T> {
        (0..self.n_cols)
            .map(|c| {
                let (rows, vals) = self.col(c);
                rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum()
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let trip: Vec<(usize, usize, T)> = (0..self.n_cols)
            .flat_map(|c| {
                let (rows, vals) = self.col(c);
                rows.iter().zip(vals).map(move |(&r, &v)| (c, r, v))
            })
            .collect();
        Self::from_triplets(self.n_cols, self.n_rows, &trip).expect("transpose of a valid matrix")
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n_cols]; self.n_rows];
        for c in 0..self.n_cols {
            let (rows, vals) = self.col(c);
            for (&r, &v) in rows.iter().zip(vals) {
                d[r][c] = v;
            }
        }
        d
    }

    /// `Σ_{(r,c)} |M_rc − M_cr|` relative to `Σ |M_rc|`; zero for symmetric matrices.
    pub(crate) fn asymmetry(&self) -> T {
        let t = self.transpose();
        let dense_a = self.to_dense();
        let dense_t = t.to_dense();
        let mut diff = T::zero();
        let mut total = T::zero();
        for (ra, rt) in dense_a.iter().zip(&dense_t) {
            for (&a, &b) in ra.iter().zip(rt) {
                diff += (a - b).abs();
                total += a.abs();
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            diff / total
        }
    }

    /// `(M + Mᵀ)/2` with the union sparsity pattern.
    pub(crate) fn symmetrized(&self) -> Self {
        let half = T::lit(0.5);
        let mut trip = Vec::with_capacity(2 * self.nnz());
        for c in 0..self.n_cols {
            let (rows, vals) = self.col(c);
            for (&r, &v) in rows.iter().zip(vals) {
                trip.push((r, c, half * v));
                trip.push((c, r, half * v));
            }
        }
        Self::from_triplets(self.n_rows, self.n_cols, &trip).expect("square matrix")
    }
}
