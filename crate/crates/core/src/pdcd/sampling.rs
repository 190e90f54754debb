use rand::Rng;

use crate::options::SamplingKind;

/// Draws blocks among the active ones, uniformly or with the kink-aware law:
/// with probability ½ uniformly over active blocks, otherwise uniformly over
/// active blocks not at a kink. A kink block thus has probability `1/(2n)`
/// and any other `1/(2n) + 1/(2(n − k))`; with every block at a kink the
/// law is uniform.
#[derive(Clone, Debug)]
pub struct Sampler {
    kind: SamplingKind,
    active: Vec<usize>,
    smooth: Vec<usize>,
    is_active: Vec<bool>,
    kink: Vec<bool>,
}

impl Sampler {
    pub fn new(kind: SamplingKind, n_blocks: usize) -> Self {
        Self {
            kind,
            active: (0..n_blocks).collect(),
            smooth: (0..n_blocks).collect(),
            is_active: vec![true; n_blocks],
            kink: vec![false; n_blocks],
        }
    }

    pub fn kind(&self) -> SamplingKind {
        self.kind
    }

    pub fn n_active(&self) -> usize {
        self.active.len()
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.is_active[i]
    }

    /// Removes block `i` from every future draw.
    pub fn deactivate(&mut self, i: usize) {
        if std::mem::replace(&mut self.is_active[i], false) {
            self.active.retain(|&b| b != i);
            self.smooth.retain(|&b| b != i);
        }
    }

    /// Installs fresh kink flags, one per block.
    pub fn set_kinks(&mut self, kink: &[bool]) {
        self.kink.copy_from_slice(kink);
        self.smooth = self
            .active
            .iter()
            .copied()
            .filter(|&i| !self.kink[i])
            .collect();
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let n = self.active.len();
        debug_assert!(n > 0);
        match self.kind {
            SamplingKind::KinkHalf if !self.smooth.is_empty() && self.smooth.len() < n => {
                if rng.gen_bool(0.5) {
                    self.active[rng.gen_range(0..n)]
                } else {
                    self.smooth[rng.gen_range(0..self.smooth.len())]
                }
            }
            _ => self.active[rng.gen_range(0..n)],
        }
    }

    /// Probability of drawing each block under the current flags.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.is_active.len()];
        let n = self.active.len() as f64;
        let m = self.smooth.len();
        let mixed = self.kind == SamplingKind::KinkHalf && m > 0 && (m as f64) < n;
        for &i in &self.active {
            p[i] = if !mixed {
                1.0 / n
            } else if self.kink[i] {
                1.0 / (2.0 * n)
            } else {
                1.0 / (2.0 * n) + 1.0 / (2.0 * m as f64)
            };
        }
        p
    }
}
