//! Index tables for the duplicated dual variables.
//!
//! The duplicated vector holds one copy `y_j(i)` of the dual variable of each
//! row `j` of `A_h` per primal block `i` whose columns touch that row. Copies
//! are grouped by primal block, so the entries refreshed when block `i` moves
//! form the contiguous range [`DualDuplicationIndex::dual_vars_to_update`].

use std::ops::Range;

use super::{BlockStructure, CscMatrix};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualDuplicationIndex {
    /// `dup_ptr[i]..dup_ptr[i + 1]` are the copies owned by primal block `i`.
    dup_ptr: Vec<usize>,
    /// Row of `A_h` for each copy.
    dup_row: Vec<usize>,
    /// Copy index of each stored entry of `A_h`.
    nz_dup: Vec<usize>,
    /// Number of primal blocks touching each row.
    m_row: Vec<usize>,
    /// Primal blocks touching each row, CSR-style.
    row_blocks_ptr: Vec<usize>,
    row_blocks: Vec<usize>,
    /// h-blocks touched by each primal block, CSR-style.
    hblk_ptr: Vec<usize>,
    hblk: Vec<usize>,
    /// Primal blocks touching each h-block, CSR-style.
    hblk_users_ptr: Vec<usize>,
    hblk_users: Vec<usize>,
}

impl DualDuplicationIndex {
    pub fn build<T: Scalar>(
        ah: &CscMatrix<T>,
        blocks: &BlockStructure,
        blocks_h: &BlockStructure,
    ) -> Self {
        let n_blocks = blocks.len();
        let n_rows = ah.n_rows();
        let mut dup_ptr = Vec::with_capacity(n_blocks + 1);
        let mut dup_row = Vec::new();
        let mut nz_dup = vec![0; ah.nnz()];
        let mut m_row = vec![0; n_rows];
        let mut hblk_ptr = Vec::with_capacity(n_blocks + 1);
        let mut hblk = Vec::new();
        // per-row slot of the current block, usize::MAX when unseen
        let mut slot = vec![usize::MAX; n_rows];
        let mut seen_h = vec![usize::MAX; blocks_h.len()];
        dup_ptr.push(0);
        hblk_ptr.push(0);
        for i in 0..n_blocks {
            let start = dup_row.len();
            let mut rows: Vec<usize> = Vec::new();
            for c in blocks.range(i) {
                rows.extend_from_slice(ah.col(c).0);
            }
            rows.sort_unstable();
            rows.dedup();
            for (k, &r) in rows.iter().enumerate() {
                slot[r] = start + k;
                m_row[r] += 1;
                let l = blocks_h.owner(r);
                if seen_h[l] != i {
                    seen_h[l] = i;
                    hblk.push(l);
                }
            }
            dup_row.extend_from_slice(&rows);
            let nzr = ah.nz_range(blocks.range(i));
            for p in nzr {
                nz_dup[p] = slot[ah.row_idx()[p]];
            }
            dup_ptr.push(dup_row.len());
            let hs = &mut hblk[hblk_ptr[i]..];
            hs.sort_unstable();
            hblk_ptr.push(hblk.len());
        }

        let mut row_blocks_ptr = vec![0; n_rows + 1];
        for &r in &dup_row {
            row_blocks_ptr[r + 1] += 1;
        }
        for r in 0..n_rows {
            row_blocks_ptr[r + 1] += row_blocks_ptr[r];
        }
        let mut fill = row_blocks_ptr.clone();
        let mut row_blocks = vec![0; dup_row.len()];
        for i in 0..n_blocks {
            for &r in &dup_row[dup_ptr[i]..dup_ptr[i + 1]] {
                row_blocks[fill[r]] = i;
                fill[r] += 1;
            }
        }

        let mut hblk_users_ptr = vec![0; blocks_h.len() + 1];
        for &l in &hblk {
            hblk_users_ptr[l + 1] += 1;
        }
        for l in 0..blocks_h.len() {
            hblk_users_ptr[l + 1] += hblk_users_ptr[l];
        }
        let mut fill = hblk_users_ptr.clone();
        let mut hblk_users = vec![0; hblk.len()];
        for i in 0..n_blocks {
            for &l in &hblk[hblk_ptr[i]..hblk_ptr[i + 1]] {
                hblk_users[fill[l]] = i;
                fill[l] += 1;
            }
        }

        Self {
            dup_ptr,
            dup_row,
            nz_dup,
            m_row,
            row_blocks_ptr,
            row_blocks,
            hblk_ptr,
            hblk,
            hblk_users_ptr,
            hblk_users,
        }
    }

    /// Length of the duplicated dual vector.
    pub fn len(&self) -> usize {
        self.dup_row.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dup_row.is_empty()
    }

    /// Positions in the duplicated vector owned by primal block `i`.
    #[inline]
    pub fn dual_vars_to_update(&self, i: usize) -> Range<usize> {
        self.dup_ptr[i]..self.dup_ptr[i + 1]
    }

    /// Rows of `A_h` touched by primal block `i`, ascending.
    #[inline]
    pub fn rows_of_block(&self, i: usize) -> &[usize] {
        &self.dup_row[self.dual_vars_to_update(i)]
    }

    /// Row of `A_h` that copy `d` duplicates.
    #[inline]
    pub fn dup_row(&self, d: usize) -> usize {
        self.dup_row[d]
    }

    pub fn dup_rows(&self) -> &[usize] {
        &self.dup_row
    }

    /// Copy index of the `p`-th stored entry of `A_h`.
    #[inline]
    pub fn nz_dup(&self, p: usize) -> usize {
        self.nz_dup[p]
    }

    /// Number of primal blocks touching row `j`.
    #[inline]
    pub fn m(&self, j: usize) -> usize {
        self.m_row[j]
    }

    pub fn m_rows(&self) -> &[usize] {
        &self.m_row
    }

    /// Primal blocks touching row `j`.
    pub fn blocks_of_row(&self, j: usize) -> &[usize] {
        &self.row_blocks[self.row_blocks_ptr[j]..self.row_blocks_ptr[j + 1]]
    }

    /// h-blocks touched by primal block `i`, ascending.
    #[inline]
    pub fn hblocks_of_block(&self, i: usize) -> &[usize] {
        &self.hblk[self.hblk_ptr[i]..self.hblk_ptr[i + 1]]
    }

    /// Primal blocks touching h-block `l`, ascending.
    pub fn blocks_of_hblock(&self, l: usize) -> &[usize] {
        &self.hblk_users[self.hblk_users_ptr[l]..self.hblk_users_ptr[l + 1]]
    }

    /// Number of primal blocks touching h-block `l`.
    pub fn m_hblock(&self, l: usize) -> usize {
        self.hblk_users_ptr[l + 1] - self.hblk_users_ptr[l]
    }

    /// Duplicated vector whose copies all equal `y` (one value per row).
    pub fn broadcast<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        self.dup_row.iter().map(|&r| y[r]).collect()
    }
}
