#![allow(dead_code)]

use cdsolve::{Problem, SolverOptions, Algorithm};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut impl Rng) -> f64 {
    // Box-Muller
    let u: f64 = r.gen_range(1e-12..1.0);
    let v: f64 = r.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn random_dense(r: &mut impl Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..n).map(|_| gaussian(r)).collect()).collect()
}

pub fn to_na(a: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), a.first().map_or(0, Vec::len), |i, j| a[i][j])
}

pub fn from_na(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

pub fn orthonormal(r: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let q = to_na(&random_dense(r, n, n)).qr().q();
    from_na(&q)
}

pub fn mat_t_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    let n = a[0].len();
    (0..n).map(|j| a.iter().zip(v).map(|(row, vi)| row[j] * vi).sum()).collect()
}

pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn opts(algorithm: Algorithm, tol: f64, max_iter: u64) -> SolverOptions {
    SolverOptions {
        algorithm,
        tol,
        max_iter,
        print_period: 10,
        ..Default::default()
    }
}

/// ½‖Ax − b‖² + λ‖x‖₁.
pub fn lasso(a: &[Vec<f64>], b: &[f64], lambda: f64) -> Problem<f64> {
    let (m, n) = (a.len(), a[0].len());
    Problem::builder(n)
        .f(vec!["square"; m])
        .cf(vec![0.5; m])
        .af(a.to_vec())
        .bf(b.to_vec())
        .g(vec!["abs"; n])
        .cg(vec![lambda; n])
        .build()
        .unwrap()
}

/// Σ log(1 + exp(b_i (Ax)_i)) + λ‖x‖₁.
pub fn sparse_logistic(a: &[Vec<f64>], b: &[f64], lambda: f64) -> Problem<f64> {
    let (m, n) = (a.len(), a[0].len());
    let ab: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, bi)| row.iter().map(|v| v * bi).collect()).collect();
    Problem::builder(n)
        .f(vec!["log1pexp"; m])
        .af(ab)
        .g(vec!["abs"; n])
        .cg(vec![lambda; n])
        .build()
        .unwrap()
}

/// ½xᵀQx + cᵀx subject to Ax = b.
pub fn eq_qp(q: &[Vec<f64>], c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Problem<f64> {
    let n = c.len();
    Problem::builder(n)
        .q(q.to_vec())
        .f(vec!["linear"])
        .af(vec![c.to_vec()])
        .h(vec!["eq"; a.len()])
        .ah(a.to_vec())
        .bh(b.to_vec())
        .build()
        .unwrap()
}

/// Solution of the KKT system of [`eq_qp`].
pub fn eq_qp_kkt(q: &[Vec<f64>], c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let (n, m) = (c.len(), a.len());
    let mut k = DMatrix::zeros(n + m, n + m);
    let mut rhs = DVector::zeros(n + m);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = q[i][j];
        }
        rhs[i] = -c[i];
    }
    for r in 0..m {
        for j in 0..n {
            k[(n + r, j)] = a[r][j];
            k[(j, n + r)] = a[r][j];
        }
        rhs[n + r] = b[r];
    }
    let sol = k.lu().solve(&rhs).expect("nonsingular KKT system");
    sol.iter().take(n).copied().collect()
}

/// cᵀx subject to x ≥ 0, Ax ≤ b.
pub fn lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Problem<f64> {
    let n = c.len();
    Problem::builder(n)
        .f(vec!["linear"])
        .af(vec![c.to_vec()])
        .g(vec!["nonneg"; n])
        .h(vec!["nonpos"; a.len()])
        .ah(a.to_vec())
        .bh(b.to_vec())
        .build()
        .unwrap()
}

/// Optimal value and point of [`lp`] by enumerating every vertex.
pub fn lp_vertices(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> (f64, Vec<f64>) {
    let n = c.len();
    let m = a.len();
    // constraints as rows g·x ≤ h
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = -1.0;
        rows.push((e, 0.0));
    }
    let total = m + n;
    let mut best = (f64::INFINITY, vec![]);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let picked: Vec<usize> = (0..total).filter(|k| mask >> k & 1 == 1).collect();
        let g = DMatrix::from_fn(n, n, |i, j| rows[picked[i]].0[j]);
        let h = DVector::from_fn(n, |i, _| rows[picked[i]].1);
        let Some(x) = g.lu().solve(&h) else { continue };
        if x.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let x: Vec<f64> = x.iter().copied().collect();
        let feasible = rows
            .iter()
            .all(|(g, h)| g.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= h + 1e-9);
        if feasible {
            let val: f64 = c.iter().zip(&x).map(|(u, v)| u * v).sum();
            if val < best.0 {
                best = (val, x);
            }
        }
    }
    best
}

/// Dual SVM with intercept:
/// `min ½‖Xᵀ D(y) α‖²/reg − eᵀα` over `α ∈ [0,1]ⁿ`, `yᵀα = 0`.
pub fn svm_dual(x: &[Vec<f64>], y: &[f64], reg: f64, intercept: bool) -> Problem<f64> {
    let n = x.len();
    let d = x[0].len();
    // rows of Xᵀ D(y): one per feature, plus the linear row −eᵀ
    let mut af: Vec<Vec<f64>> = (0..d).map(|k| (0..n).map(|i| x[i][k] * y[i]).collect()).collect();
    af.push(vec![-1.0; n]);
    let mut f: Vec<&str> = vec!["square"; d];
    f.push("linear");
    let mut cf = vec![0.5 / reg; d];
    cf.push(1.0);
    let b = Problem::builder(n).f(f).cf(cf).af(af).g(vec!["box01"; n]);
    let b = if intercept {
        b.h(vec!["eq"]).ah(vec![y.to_vec()])
    } else {
        b
    };
    b.build().unwrap()
}

pub fn svm_dual_objective(x: &[Vec<f64>], y: &[f64], reg: f64, alpha: &[f64]) -> f64 {
    let w = svm_weights(x, y, alpha);
    0.5 * w.iter().map(|v| v * v).sum::<f64>() / reg - alpha.iter().sum::<f64>()
}

/// `Σ α_i y_i x_i`.
pub fn svm_weights(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> Vec<f64> {
    let d = x[0].len();
    (0..d)
        .map(|k| (0..x.len()).map(|i| alpha[i] * y[i] * x[i][k]).sum())
        .collect()
}

/// Reference solution of the dual SVM with intercept by sequential minimal
/// optimisation with maximal-violating-pair selection.
pub fn svm_smo(x: &[Vec<f64>], y: &[f64], reg: f64, tol: f64) -> Vec<f64> {
    let n = x.len();
    let kmat: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| y[i] * y[j] * x[i].iter().zip(&x[j]).map(|(u, v)| u * v).sum::<f64>() / reg)
                .collect()
        })
        .collect();
    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀKα − eᵀα
    let mut grad = vec![-1.0; n];
    for _ in 0..1_000_000 {
        // maximal violating pair on the constraint yᵀα = 0, 0 ≤ α ≤ 1
        let mut i_up = None;
        let mut m_up = f64::NEG_INFINITY;
        let mut i_low = None;
        let mut m_low = f64::INFINITY;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let up = (y[t] > 0.0 && alpha[t] < 1.0) || (y[t] < 0.0 && alpha[t] > 0.0);
            let low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < 1.0);
            if up && v > m_up {
                m_up = v;
                i_up = Some(t);
            }
            if low && v < m_low {
                m_low = v;
                i_low = Some(t);
            }
        }
        let (Some(i), Some(j)) = (i_up, i_low) else { break };
        if m_up - m_low < tol {
            break;
        }
        // move along y_i e_i − y_j e_j
        let curv = kmat[i][i] + kmat[j][j] - 2.0 * y[i] * y[j] * kmat[i][j];
        let slope = y[i] * grad[i] - y[j] * grad[j];
        let mut t = if curv > 1e-15 { -slope / curv } else { f64::INFINITY };
        let lim_i = if y[i] > 0.0 { 1.0 - alpha[i] } else { alpha[i] };
        let lim_j = if y[j] > 0.0 { alpha[j] } else { 1.0 - alpha[j] };
        t = t.min(lim_i).min(lim_j).max(0.0);
        let di = y[i] * t;
        let dj = -y[j] * t;
        alpha[i] += di;
        alpha[j] += dj;
        for k in 0..n {
            grad[k] += kmat[k][i] * di + kmat[k][j] * dj;
        }
    }
    alpha
}

/// Two separable-ish Gaussian clouds in the plane, labels ±1.
pub fn svm_data(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut r = rng(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        x.push(vec![label * 1.0 + gaussian(&mut r), label * 0.5 + gaussian(&mut r)]);
        y.push(label);
    }
    (x, y)
}

/// Random sparse `m × n` matrix with about `nnz` entries, at least one per column.
pub fn random_sparse(r: &mut impl Rng, m: usize, n: usize, nnz: usize) -> cdsolve::CscMatrix<f64> {
    let mut t = Vec::with_capacity(nnz + n);
    for c in 0..n {
        t.push((r.gen_range(0..m), c, gaussian(r)));
    }
    for _ in n..nnz {
        t.push((r.gen_range(0..m), r.gen_range(0..n), gaussian(r)));
    }
    cdsolve::CscMatrix::from_triplets(m, n, &t).unwrap()
}

/// Block boundaries with sizes drawn from `1..=max`.
pub fn random_blocks(r: &mut impl Rng, n: usize, max: usize) -> Vec<usize> {
    let mut b = vec![0];
    while *b.last().unwrap() < n {
        let s = r.gen_range(1..=max).min(n - b.last().unwrap());
        b.push(b.last().unwrap() + s);
    }
    b
}

/// A problem exercising every term: square losses, a diagonal-dominant Q,
/// abs penalties and grouped equality constraints.
pub fn random_full(r: &mut impl Rng, n: usize, mf: usize, mh: usize, nnz: usize, max_block: usize) -> Problem<f64> {
    let af = random_sparse(r, mf, n, nnz);
    let ah = random_sparse(r, mh, n, nnz / 2);
    let q = random_sparse(r, n, n, n);
    let blocks = random_blocks(r, n, max_block);
    let blocks_h = random_blocks(r, mh, 2);
    let nb = blocks.len() - 1;
    let nh = blocks_h.len() - 1;
    Problem::builder(n)
        .blocks(blocks)
        .f(vec!["square"; mf])
        .cf(vec![0.5; mf])
        .af(af)
        .bf((0..mf).map(|_| gaussian(r)).collect::<Vec<_>>())
        .q(q)
        .g(vec!["abs"; nb])
        .h(vec!["norm2"; nh])
        .blocks_h(blocks_h)
        .ah(ah)
        .bh((0..mh).map(|_| gaussian(r)).collect::<Vec<_>>())
        .build()
        .unwrap()
}

/// Square matrix `U diag(s) Vᵀ` with log-spaced singular values from 1 down to `1/cond`.
pub fn conditioned(r: &mut impl Rng, n: usize, cond: f64) -> Vec<Vec<f64>> {
    let u = to_na(&orthonormal(r, n));
    let v = to_na(&orthonormal(r, n));
    let s = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| cond.powf(-(i as f64) / (n as f64 - 1.0))));
    from_na(&(u * s * v.transpose()))
}

/// ½‖Ax − b‖² with no other term.
pub fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Problem<f64> {
    Problem::builder(a[0].len())
        .f(vec!["square"; a.len()])
        .cf(vec![0.5; a.len()])
        .af(a.to_vec())
        .bf(b.to_vec())
        .build()
        .unwrap()
}
