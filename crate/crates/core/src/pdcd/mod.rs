//! Primal-dual coordinate descent with duplicated dual variables.

mod sampling;

pub use sampling::Sampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::atoms::{AtomError, AtomMode};
use crate::diagnostics::{dual_estimate, h_conj_prox};
use crate::error::SolverError;
use crate::linalg::{block_gram, dense_psd_radius, RowView};
use crate::model::Problem;
use crate::options::{SolveResult, SolverOptions};
use crate::run::{drive, Engine};
use crate::scalar::Scalar;
use crate::state::SolverState;

/// Primal steps, dual steps and coordinate Lipschitz constants.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSizes<T> {
    /// One per primal block.
    pub tau: Vec<T>,
    /// One per h-block.
    pub sigma: Vec<T>,
    /// One per primal block.
    pub beta: Vec<T>,
}

/// `β_i = ρ(Q_ii) + Σ_j c_j L_j ρ(A_{j,i}ᵀ A_{j,i})` over the f-blocks `j`.
pub fn compute_beta<T: Scalar>(p: &Problem<T>) -> Result<Vec<T>, SolverError> {
    let f = p.f();
    let mut cl = Vec::with_capacity(f.len());
    for (j, a) in f.atoms.iter().enumerate() {
        if !a.supports(AtomMode::Lipschitz) {
            return Err(AtomError::Unsupported {
                atom: a.name().to_string(),
                mode: AtomMode::Lipschitz,
            }
            .into());
        }
        cl.push(f.weights[j] * a.lipschitz()?);
    }
    let blocks = p.blocks();
    let mut beta = Vec::with_capacity(blocks.len());
    for i in 0..blocks.len() {
        let range = blocks.range(i);
        let d = range.len();
        let mut b = match p.q() {
            Some(q) => q_block_radius(q, range.clone()),
            None => T::zero(),
        };
        if !f.is_empty() {
            if d == 1 {
                let (rows, vals) = f.matrix.col(range.start);
                for (&r, &v) in rows.iter().zip(vals) {
                    b += cl[f.blocks.owner(r)] * v * v;
                }
            } else {
                b += grouped_radius_sum(&f.matrix, range, |r| f.blocks.owner(r), &cl);
            }
        }
        beta.push(b);
    }
    Ok(beta)
}

/// `ρ` of the diagonal block of `Q` on `range`.
fn q_block_radius<T: Scalar>(q: &crate::model::CscMatrix<T>, range: std::ops::Range<usize>) -> T {
    let d = range.len();
    let start = range.start;
    let mut m = vec![T::zero(); d * d];
    for c in range.clone() {
        let (rows, vals) = q.col(c);
        for (&r, &v) in rows.iter().zip(vals) {
            if range.contains(&r) {
                m[(r - start) * d + (c - start)] = v;
            }
        }
    }
    dense_psd_radius(&m, d)
}

/// `Σ_g w_g ρ(A_{g}ᵀ A_{g})` where `A_g` gathers the rows of group `g`
/// restricted to the columns `range`.
fn grouped_radius_sum<T: Scalar>(
    m: &crate::model::CscMatrix<T>,
    range: std::ops::Range<usize>,
    group: impl Fn(usize) -> usize,
    w: &[T],
) -> T {
    let mut groups: Vec<usize> = range.clone().flat_map(|c| m.col(c).0.iter().map(|&r| group(r))).collect();
    groups.sort_unstable();
    groups.dedup();
    let d = range.len();
    groups
        .into_iter()
        .map(|g| {
            if w[g] == T::zero() {
                return T::zero();
            }
            let gram = block_gram(m, range.clone(), |r| (group(r) == g).then_some(T::one()));
            w[g] * dense_psd_radius(&gram, d)
        })
        .sum()
}

/// Default dual steps `σ_l = 1/(m_l · max(1, ρ(A_l A_lᵀ)))`, `m_l` being the
/// largest row multiplicity in h-block `l`.
pub fn default_sigma<T: Scalar>(p: &Problem<T>) -> Vec<T> {
    let h = p.h();
    if h.is_empty() {
        return Vec::new();
    }
    let dup = p.duplication();
    let rows = RowView::new(&h.matrix);
    (0..h.len())
        .map(|l| {
            let range = h.blocks.range(l);
            let m = range.clone().map(|j| dup.m(j)).max().unwrap_or(0).max(1);
            let rho = rows.rows_gram_radius(range);
            T::one() / (T::from_usize(m).expect("count") * rho.max(T::one()))
        })
        .collect()
}

/// `ρ(Σ_{j ∈ J(i)} m_j σ_j a_{j,i}ᵀ a_{j,i})`, the dual part of the step bound
/// of block `i`.
pub fn dual_radius<T: Scalar>(p: &Problem<T>, sigma: &[T], i: usize) -> T {
    let h = p.h();
    if h.is_empty() {
        return T::zero();
    }
    let dup = p.duplication();
    let range = p.blocks().range(i);
    let d = range.len();
    let gram = block_gram(&h.matrix, range, |r| {
        Some(T::from_usize(dup.m(r)).expect("count") * sigma[h.blocks.owner(r)])
    });
    dense_psd_radius(&gram, d)
}

/// Steps satisfying `τ_i < 1/(β_i + ρ_i)` with `τ_i = safety/(β_i + ρ_i)`.
/// A block with `β_i + ρ_i = 0` gets `τ_i = safety`.
pub fn compute_step_sizes<T: Scalar>(
    p: &Problem<T>,
    safety: T,
    sigma: Option<Vec<T>>,
) -> Result<StepSizes<T>, SolverError> {
    if !(safety > T::zero() && safety < T::one()) {
        return Err(SolverError::InvalidOption(format!(
            "safety factor must lie in (0, 1), got {safety}"
        )));
    }
    let sigma = match sigma {
        Some(s) => {
            if s.len() != p.h().len() {
                return Err(SolverError::InvalidOption(format!(
                    "{} dual steps given for {} h-blocks",
                    s.len(),
                    p.h().len()
                )));
            }
            if s.iter().any(|v| !(*v > T::zero() && v.is_finite())) {
                return Err(SolverError::InvalidOption("dual steps must be positive".into()));
            }
            s
        }
        None => default_sigma(p),
    };
    let beta = compute_beta(p)?;
    let tau = (0..p.n_blocks())
        .map(|i| {
            let denom = beta[i] + dual_radius(p, &sigma, i);
            if denom > T::zero() {
                safety / denom
            } else {
                safety
            }
        })
        .collect();
    Ok(StepSizes { tau, sigma, beta }).and_then(|s: StepSizes<T>| {
        if s.tau.iter().all(|t| t.is_finite() && *t > T::zero()) {
            Ok(s)
        } else {
            Err(SolverError::NonFinite {
                what: "step sizes",
                iteration: 0,
            })
        }
    })
}

/// `x̄ = D⁻¹(b + prox_{cD²τ g}(D u − b))` for block `i`, or `u` without `G`.
pub(crate) fn primal_prox<T: Scalar>(
    p: &Problem<T>,
    i: usize,
    u: &[T],
    tau: T,
    arg: &mut [T],
    out: &mut [T],
) -> Result<(), AtomError> {
    if !p.has_g() {
        out.copy_from_slice(u);
        return Ok(());
    }
    let range = p.blocks().range(i);
    let d = p.dg()[i];
    let c = p.cg()[i];
    let bg = &p.bg()[range];
    for k in 0..u.len() {
        arg[k] = d * u[k] - bg[k];
    }
    p.g_atoms()[i].prox(arg, c * d * d * tau, out)?;
    for k in 0..u.len() {
        out[k] = (bg[k] + out[k]) / d;
    }
    Ok(())
}

/// Whether each block currently sits at a kink of its separable atom.
pub(crate) fn kink_flags<T: Scalar>(p: &Problem<T>, x: &[T]) -> Vec<bool> {
    if !p.has_g() {
        return vec![false; p.n_blocks()];
    }
    let mut buf = vec![T::zero(); p.blocks().max_size()];
    (0..p.n_blocks())
        .map(|i| {
            let n = p.blocks().size(i);
            crate::diagnostics::g_argument(p, i, x, &mut buf[..n]);
            p.g_atoms()[i].is_kink(&buf[..n])
        })
        .collect()
}

/// One run of the primal-dual method over a problem.
#[derive(Debug)]
pub struct Pdcd<'a, T: Scalar> {
    p: &'a Problem<T>,
    pub state: SolverState<T>,
    pub steps: StepSizes<T>,
    pub sampler: Sampler,
    rng: ChaCha8Rng,
    iterations: u64,
    ybar: Vec<T>,
    grad: Vec<T>,
    u: Vec<T>,
    arg: Vec<T>,
    xbar: Vec<T>,
    vbuf: Vec<T>,
    shifted: Vec<T>,
}

impl<'a, T: Scalar> Pdcd<'a, T> {
    pub fn new(p: &'a Problem<T>, options: &SolverOptions) -> Result<Self, SolverError> {
        let sigma = options
            .sigma
            .as_ref()
            .map(|s| s.iter().map(|&v| T::lit(v)).collect());
        let steps = compute_step_sizes(p, T::lit(options.safety), sigma)?;
        Ok(Self::with_steps(p, steps, options))
    }

    pub fn with_steps(p: &'a Problem<T>, steps: StepSizes<T>, options: &SolverOptions) -> Self {
        let width = p.blocks().max_size();
        let hwidth = (0..p.h().len()).map(|l| p.h().blocks.size(l)).max().unwrap_or(0);
        let mut sampler = Sampler::new(options.sampling, p.n_blocks());
        let state = SolverState::new(p);
        sampler.set_kinks(&kink_flags(p, &state.x));
        Self {
            p,
            state,
            steps,
            sampler,
            rng: ChaCha8Rng::seed_from_u64(options.seed),
            iterations: 0,
            ybar: vec![T::zero(); p.h().dim()],
            grad: vec![T::zero(); width],
            u: vec![T::zero(); width],
            arg: vec![T::zero(); width],
            xbar: vec![T::zero(); width],
            vbuf: vec![T::zero(); hwidth],
            shifted: vec![T::zero(); hwidth],
        }
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// One update of block `i`.
    pub fn update_block(&mut self, i: usize) -> Result<(), SolverError> {
        let p = self.p;
        let h = p.h();
        let dup = p.duplication();
        let sigma = &self.steps.sigma;
        // dual coordinates touched by block i, full h-blocks at a time
        for &l in dup.hblocks_of_block(i) {
            let rows = h.blocks.range(l);
            let n = rows.len();
            for (k, row) in rows.clone().enumerate() {
                self.vbuf[k] = self.state.z[row] + sigma[l] * self.state.r_h[row];
            }
            h_conj_prox(p, l, &self.vbuf[..n], sigma[l], &mut self.shifted[..n], &mut self.ybar[rows])?;
        }
        let range = p.blocks().range(i);
        let n = range.len();
        self.state.partial_gradient(p, i, &mut self.grad[..n])?;
        let tau = self.steps.tau[i];
        let ah = &h.matrix;
        for (k, c) in range.clone().enumerate() {
            let mut aty = T::zero();
            if !h.is_empty() {
                let (rows, vals) = ah.col(c);
                for (&r, &v) in rows.iter().zip(vals) {
                    aty += v * self.ybar[r];
                }
            }
            let two = T::one() + T::one();
            self.u[k] = self.state.x[c] - tau * (self.grad[k] + two * aty - self.state.w[c]);
        }
        primal_prox(p, i, &self.u[..n], tau, &mut self.arg[..n], &mut self.xbar[..n])?;
        if self.xbar[..n].iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite {
                what: "primal iterate",
                iteration: self.iterations,
            });
        }
        self.state.apply_primal_update(p, i, &self.xbar[..n]);
        self.state.apply_dual_update(p, i, &self.ybar);
        self.iterations += 1;
        Ok(())
    }

    /// Draws a block and updates it.
    pub fn step(&mut self) -> Result<usize, SolverError> {
        let i = self.sampler.sample(&mut self.rng);
        self.update_block(i)?;
        Ok(i)
    }

    /// `prox_{σH*}(z + σ A_h x)` over every row.
    pub fn dual_estimate(&self) -> Result<Vec<T>, AtomError> {
        let sigma = &self.steps.sigma;
        dual_estimate(self.p, &self.state.z, &self.state.r_h, |l| sigma[l], true)
    }
}

impl<T: Scalar> Engine<T> for Pdcd<'_, T> {
    fn n_active(&self) -> usize {
        self.sampler.n_active()
    }

    fn step(&mut self) -> Result<(), SolverError> {
        Pdcd::step(self).map(|_| ())
    }

    fn refresh(&mut self) {
        let drift = self.state.refresh_residuals(self.p);
        log::trace!("residual refresh, drift {drift:e}");
    }

    fn refresh_kinks(&mut self) {
        let flags = kink_flags(self.p, &self.state.x);
        self.sampler.set_kinks(&flags);
    }

    fn output(&self) -> Vec<T> {
        self.state.x.clone()
    }

    fn dual_estimate(&self) -> Result<Vec<T>, AtomError> {
        Pdcd::dual_estimate(self)
    }

    fn fix_blocks(&mut self, fixed: &[(usize, Vec<T>)]) {
        for (i, v) in fixed {
            self.state.apply_primal_update(self.p, *i, v);
            self.sampler.deactivate(*i);
        }
    }

    fn dual_vector(&self) -> Vec<T> {
        self.state.y.clone()
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }
}

/// Runs the primal-dual method until the smoothed gap criterion, the epoch
/// budget or the time budget is met.
pub fn run<T: Scalar>(p: &Problem<T>, options: &SolverOptions) -> Result<SolveResult<T>, SolverError> {
    let mut engine = Pdcd::new(p, options)?;
    drive(&mut engine, p, options)
}
