//! Accelerated coordinate descent with homotopy smoothing of `H` and restart.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::atoms::AtomError;
use crate::diagnostics::{dual_estimate, h_conj_prox};
use crate::error::SolverError;
use crate::linalg::{block_gram, dense_psd_radius};
use crate::model::Problem;
use crate::options::{RestartPolicy, SamplingKind, SolveResult, SolverOptions};
use crate::pdcd::{compute_beta, primal_prox, Sampler};
use crate::run::{drive, Engine};
use crate::scalar::{norm2, Scalar};
use crate::state::{add_column, block_gradient, GradTables};

/// Next momentum parameter: the positive root of
/// `θ³ + θ² + θ_k²θ − θ_k² = 0` when `has_h`, of `θ² + θ_k²θ − θ_k² = 0` otherwise.
pub fn theta_next<T: Scalar>(theta: T, has_h: bool) -> T {
    let a = theta * theta;
    if !has_h {
        let four = T::lit(4.0);
        return (a + a) / (a + (a * a + four * a).sqrt());
    }
    // The cubic is convex and increasing on θ > 0 and positive at θ_k, so
    // Newton from θ_k decreases monotonically to the root.
    let one = T::one();
    let two = one + one;
    let three = two + one;
    let mut t = theta;
    for _ in 0..100 {
        let p = ((t + one) * t + a) * t - a;
        let dp = (three * t + two) * t + a;
        let next = t - p / dp;
        if !(next < t) || next <= T::zero() {
            break;
        }
        t = next;
    }
    t
}

/// Iteration counts at which the momentum is reset.
#[derive(Clone, Debug)]
pub struct RestartSchedule {
    policy: RestartPolicy,
    period: u64,
    next: u64,
}

impl RestartSchedule {
    pub fn new(policy: RestartPolicy, n_blocks: usize) -> Result<Self, SolverError> {
        let period = match policy {
            RestartPolicy::FixedPeriod(p) => p,
            RestartPolicy::Doubling(p0) => p0.unwrap_or(2 * n_blocks as u64),
        };
        if period == 0 {
            return Err(SolverError::InvalidOption("restart period must be at least 1".into()));
        }
        Ok(Self {
            policy,
            period,
            next: period,
        })
    }

    /// Whether the momentum is reset after the `t`-th iteration.
    pub fn due(&self, t: u64) -> bool {
        t == self.next
    }

    pub fn advance(&mut self) {
        if let RestartPolicy::Doubling(_) = self.policy {
            self.period = self.period.saturating_mul(2);
        }
        self.next = self.next.saturating_add(self.period);
    }

    pub fn next(&self) -> u64 {
        self.next
    }
}

/// Iterate of the accelerated method. The current estimate is `x̃ + c·x̂`.
#[derive(Debug)]
pub struct AccelState<'a, T: Scalar> {
    p: &'a Problem<T>,
    tables: GradTables,
    sampler: Sampler,
    rng: ChaCha8Rng,
    schedule: RestartSchedule,
    has_h: bool,
    x_hat: Vec<T>,
    x_tilde: Vec<T>,
    y_dot: Vec<T>,
    theta0: T,
    theta: T,
    c: T,
    /// `c` of the last iteration, which weights `x̂` in the output.
    c_out: T,
    gamma: T,
    gamma1: T,
    beta: Vec<T>,
    /// `ρ(A_{:,i}ᵀ A_{:,i})` for `A_h`.
    rho_h: Vec<T>,
    fh: Vec<T>,
    ft: Vec<T>,
    qh: Vec<T>,
    qt: Vec<T>,
    hh: Vec<T>,
    ht: Vec<T>,
    comb_f: Vec<T>,
    gbuf: Vec<T>,
    ybar: Vec<T>,
    grad: Vec<T>,
    u: Vec<T>,
    arg: Vec<T>,
    xbar: Vec<T>,
    vbuf: Vec<T>,
    shifted: Vec<T>,
    iterations: u64,
    restarts: u64,
}

impl<'a, T: Scalar> AccelState<'a, T> {
    pub fn new(p: &'a Problem<T>, options: &SolverOptions) -> Result<Self, SolverError> {
        if options.sampling == SamplingKind::KinkHalf {
            return Err(SolverError::InvalidOption(
                "kink_half sampling is only available for the primal-dual method".into(),
            ));
        }
        let has_h = p.h().dim() > 0;
        let ah = &p.h().matrix;
        let gamma1 = match options.gamma1 {
            Some(g) if g > 0.0 && g.is_finite() => T::lit(g),
            Some(g) => return Err(SolverError::InvalidOption(format!("gamma1 must be positive, got {g}"))),
            None => {
                let m = (0..p.n())
                    .map(|c| norm2(ah.col(c).1))
                    .fold(T::zero(), T::max);
                if m > T::zero() {
                    m
                } else {
                    T::one()
                }
            }
        };
        let rho_h = (0..p.n_blocks())
            .map(|i| {
                if !has_h {
                    return T::zero();
                }
                let range = p.blocks().range(i);
                let d = range.len();
                dense_psd_radius(&block_gram(ah, range, |_| Some(T::one())), d)
            })
            .collect();
        let n = p.n();
        let width = p.blocks().max_size();
        let hwidth = (0..p.h().len()).map(|l| p.h().blocks.size(l)).max().unwrap_or(0);
        let theta0 = T::one() / T::from_usize(p.n_blocks().max(1)).expect("count");
        let mut s = Self {
            p,
            tables: GradTables::new(p),
            sampler: Sampler::new(SamplingKind::Uniform, p.n_blocks()),
            rng: ChaCha8Rng::seed_from_u64(options.seed),
            schedule: RestartSchedule::new(options.restart, p.n_blocks())?,
            has_h,
            x_hat: vec![T::zero(); n],
            x_tilde: p.x_init().to_vec(),
            y_dot: match p.y_init() {
                // a duplicated initial dual collapses to its row averages
                Some(y) => crate::state::dual_aggregates(p, y).1,
                None => vec![T::zero(); p.h().dim()],
            },
            theta0,
            theta: theta0,
            c: T::one(),
            c_out: T::one(),
            gamma: gamma1,
            gamma1,
            beta: compute_beta(p)?,
            rho_h,
            fh: vec![T::zero(); p.f().dim()],
            ft: vec![T::zero(); p.f().dim()],
            qh: Vec::new(),
            qt: Vec::new(),
            hh: vec![T::zero(); p.h().dim()],
            ht: vec![T::zero(); p.h().dim()],
            comb_f: vec![T::zero(); p.f().dim()],
            gbuf: vec![T::zero(); p.f().dim()],
            ybar: vec![T::zero(); p.h().dim()],
            grad: vec![T::zero(); width],
            u: vec![T::zero(); width],
            arg: vec![T::zero(); width],
            xbar: vec![T::zero(); width],
            vbuf: vec![T::zero(); hwidth],
            shifted: vec![T::zero(); hwidth],
            iterations: 0,
            restarts: 0,
        };
        s.rebuild_caches();
        Ok(s)
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn theta0(&self) -> T {
        self.theta0
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn x_hat(&self) -> &[T] {
        &self.x_hat
    }

    pub fn x_tilde(&self) -> &[T] {
        &self.x_tilde
    }

    pub fn y_dot(&self) -> &[T] {
        &self.y_dot
    }

    pub fn restarts(&self) -> u64 {
        self.restarts
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// `B_i = β_i + ρ(A_{:,i}ᵀ A_{:,i})/γ` at the current smoothing.
    pub fn block_constant(&self, i: usize) -> T {
        if self.has_h {
            self.beta[i] + self.rho_h[i] / self.gamma
        } else {
            self.beta[i]
        }
    }

    /// Cached `(A_f x̂, A_f x̃ − b_f, Q x̂, Q x̃, A_h x̂, A_h x̃)`.
    pub fn caches(&self) -> [&[T]; 6] {
        [&self.fh, &self.ft, &self.qh, &self.qt, &self.hh, &self.ht]
    }

    /// Current estimate `x̃ + c·x̂`.
    pub fn combined(&self) -> Vec<T> {
        self.x_tilde
            .iter()
            .zip(&self.x_hat)
            .map(|(&t, &h)| t + self.c_out * h)
            .collect()
    }

    /// Recomputes every residual cache from `x̂` and `x̃`.
    pub fn rebuild_caches(&mut self) {
        let p = self.p;
        let f = p.f();
        self.fh = f.matrix.mul_vec(&self.x_hat);
        self.ft = f.matrix.mul_vec(&self.x_tilde);
        for (r, &b) in self.ft.iter_mut().zip(&f.offset) {
            *r -= b;
        }
        if let Some(q) = p.q() {
            self.qh = q.mul_vec(&self.x_hat);
            self.qt = q.mul_vec(&self.x_tilde);
        }
        self.hh = p.h().matrix.mul_vec(&self.x_hat);
        self.ht = p.h().matrix.mul_vec(&self.x_tilde);
    }

    /// `prox_{H*/γ}(ẏ + (c A_h x̂ + A_h x̃)/γ)` over every row, with the
    /// parameters of the next iteration.
    fn full_dual(&self, c: T) -> Result<Vec<T>, AtomError> {
        let ax: Vec<T> = self.hh.iter().zip(&self.ht).map(|(&h, &t)| c * h + t).collect();
        let inv = T::one() / self.gamma;
        dual_estimate(self.p, &self.y_dot, &ax, |_| inv, true)
    }

    /// One update of block `i`, then the parameter updates.
    pub fn update_block(&mut self, i: usize) -> Result<(), SolverError> {
        let p = self.p;
        let h = p.h();
        let c = self.c;
        if self.has_h {
            let inv = T::one() / self.gamma;
            for &l in p.duplication().hblocks_of_block(i) {
                let rows = h.blocks.range(l);
                let n = rows.len();
                for (k, row) in rows.clone().enumerate() {
                    self.vbuf[k] = self.y_dot[row] + (c * self.hh[row] + self.ht[row]) * inv;
                }
                h_conj_prox(p, l, &self.vbuf[..n], inv, &mut self.shifted[..n], &mut self.ybar[rows])?;
            }
        }
        let f = p.f();
        for &j in self.tables.fblocks_of_block(i) {
            for r in f.blocks.range(j) {
                self.comb_f[r] = c * self.fh[r] + self.ft[r];
            }
        }
        let range = p.blocks().range(i);
        let n = range.len();
        let (qh, qt) = (&self.qh, &self.qt);
        block_gradient(
            p,
            &self.tables,
            i,
            &self.comb_f,
            |col| c * qh[col] + qt[col],
            &mut self.gbuf,
            &mut self.grad[..n],
            true,
        )?;
        let b = self.block_constant(i);
        let tau = self.theta0 / self.theta / if b > T::zero() { b } else { T::one() };
        for (k, col) in range.clone().enumerate() {
            let mut aty = T::zero();
            if self.has_h {
                let (rows, vals) = h.matrix.col(col);
                for (&r, &v) in rows.iter().zip(vals) {
                    aty += v * self.ybar[r];
                }
            }
            self.u[k] = self.x_tilde[col] - tau * (self.grad[k] + aty);
        }
        primal_prox(p, i, &self.u[..n], tau, &mut self.arg[..n], &mut self.xbar[..n])?;
        if self.xbar[..n].iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite {
                what: "primal iterate",
                iteration: self.iterations,
            });
        }
        let coef = (T::one() - self.theta / self.theta0) / c;
        for (k, col) in range.enumerate() {
            let delta = self.xbar[k] - self.x_tilde[col];
            if delta == T::zero() {
                continue;
            }
            self.x_tilde[col] = self.xbar[k];
            add_column(&f.matrix, col, delta, &mut self.ft);
            add_column(&h.matrix, col, delta, &mut self.ht);
            if let Some(q) = p.q() {
                add_column(q, col, delta, &mut self.qt);
            }
            if coef != T::zero() {
                let dh = -coef * delta;
                self.x_hat[col] += dh;
                add_column(&f.matrix, col, dh, &mut self.fh);
                add_column(&h.matrix, col, dh, &mut self.hh);
                if let Some(q) = p.q() {
                    add_column(q, col, dh, &mut self.qh);
                }
            }
        }
        self.c_out = c;
        let next = theta_next(self.theta, self.has_h);
        if self.has_h {
            self.gamma /= T::one() + next;
        }
        self.c = (T::one() - next) * c;
        self.theta = next;
        self.iterations += 1;
        Ok(())
    }

    /// Collapses to `x̃ + c·x̂`, anchors the dual at `ybar` (one value per
    /// row of `A_h`) and resets the momentum and smoothing.
    pub fn restart(&mut self, ybar: Option<Vec<T>>) {
        self.x_tilde = self.combined();
        self.x_hat.iter_mut().for_each(|v| *v = T::zero());
        if let Some(y) = ybar {
            self.y_dot = y;
        }
        self.c = T::one();
        self.c_out = T::one();
        self.theta = self.theta0;
        self.gamma = self.gamma1;
        self.restarts += 1;
        self.rebuild_caches();
    }

    /// Draws a block, updates it and restarts when the schedule says so.
    pub fn step(&mut self) -> Result<usize, SolverError> {
        let due = self.schedule.due(self.iterations + 1);
        let ybar = if due && self.has_h {
            Some(self.full_dual(self.c)?)
        } else {
            None
        };
        let i = self.sampler.sample(&mut self.rng);
        self.update_block(i)?;
        if due {
            self.restart(ybar);
            self.schedule.advance();
        }
        Ok(i)
    }
}

impl<T: Scalar> Engine<T> for AccelState<'_, T> {
    fn n_active(&self) -> usize {
        self.sampler.n_active()
    }

    fn step(&mut self) -> Result<(), SolverError> {
        AccelState::step(self).map(|_| ())
    }

    fn refresh(&mut self) {
        self.rebuild_caches();
    }

    fn refresh_kinks(&mut self) {}

    fn output(&self) -> Vec<T> {
        self.combined()
    }

    fn dual_estimate(&self) -> Result<Vec<T>, AtomError> {
        if !self.has_h {
            return Ok(Vec::new());
        }
        self.full_dual(self.c_out)
    }

    fn fix_blocks(&mut self, fixed: &[(usize, Vec<T>)]) {
        self.x_tilde = self.combined();
        self.x_hat.iter_mut().for_each(|v| *v = T::zero());
        for (i, v) in fixed {
            let start = self.p.blocks().range(*i).start;
            self.x_tilde[start..start + v.len()].copy_from_slice(v);
            self.sampler.deactivate(*i);
        }
        let n = self.sampler.n_active().max(1);
        self.theta0 = T::one() / T::from_usize(n).expect("count");
        self.restart(None);
    }

    fn dual_vector(&self) -> Vec<T> {
        self.y_dot.clone()
    }

    fn iterations(&self) -> u64 {
        self.iterations
    }
}

/// Runs the accelerated method; the returned point is `x̃ + c·x̂`.
pub fn run_accel<T: Scalar>(p: &Problem<T>, options: &SolverOptions) -> Result<SolveResult<T>, SolverError> {
    let mut engine = AccelState::new(p, options)?;
    drive(&mut engine, p, options)
}
