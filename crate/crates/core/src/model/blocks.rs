use std::ops::Range;

use super::ModelError;

/// Contiguous partition of `0..dim` stored like the `indptr` array of a
/// sparse matrix: block `k` covers `bounds[k]..bounds[k + 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    bounds: Vec<usize>,
    owner: Vec<usize>,
}

impl BlockStructure {
    pub fn new(bounds: Vec<usize>) -> Result<Self, ModelError> {
        if bounds.first() != Some(&0) {
            return Err(ModelError::InvalidBlocks(
                "block boundaries must start at 0".into(),
            ));
        }
        if bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::InvalidBlocks(format!(
                "block boundaries must be strictly increasing: {bounds:?}"
            )));
        }
        let dim = *bounds.last().expect("nonempty");
        let mut owner = vec![0; dim];
        for (k, w) in bounds.windows(2).enumerate() {
            owner[w[0]..w[1]].fill(k);
        }
        Ok(Self { bounds, owner })
    }

    /// One block per coordinate.
    pub fn scalar(dim: usize) -> Self {
        Self {
            bounds: (0..=dim).collect(),
            owner: (0..dim).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        *self.bounds.last().expect("nonempty")
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    #[inline]
    pub fn range(&self, k: usize) -> Range<usize> {
        self.bounds[k]..self.bounds[k + 1]
    }

    #[inline]
    pub fn size(&self, k: usize) -> usize {
        self.bounds[k + 1] - self.bounds[k]
    }

    /// Block owning coordinate `i`.
    #[inline]
    pub fn owner(&self, i: usize) -> usize {
        self.owner[i]
    }

    pub fn max_size(&self) -> usize {
        (0..self.len()).map(|k| self.size(k)).max().unwrap_or(0)
    }

    pub fn is_scalar(&self) -> bool {
        self.len() == self.dim()
    }
}
