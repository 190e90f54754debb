#![allow(dead_code)]

#[path = "../../../core/tests/common/mod.rs"]
pub mod core_common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::DMatrix;

pub const FIXTURES: [&str; 9] = [
    "lasso",
    "logistic",
    "sparse_logistic",
    "svm",
    "svm_intercept",
    "qp",
    "lp",
    "tv_l1",
    "multinomial",
];

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn spec_path(name: &str) -> PathBuf {
    fixtures_dir().join(name).join("problem.toml")
}

pub fn cdsolve() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cdsolve"));
    c.env_remove("CD_SOLVER_THREADS").env_remove("RUST_LOG");
    c
}

pub fn run_cli(args: &[&str]) -> Output {
    cdsolve().args(args).output().expect("spawn cdsolve")
}

// Plain parsers for the fixture files, independent of the crate's readers.

pub fn read_mtx(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('%'));
    let dims: Vec<usize> = lines.next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    let mut a = vec![vec![0.0; dims[1]]; dims[0]];
    for l in lines {
        let t: Vec<&str> = l.split_whitespace().collect();
        let (r, c): (usize, usize) = (t[0].parse().unwrap(), t[1].parse().unwrap());
        a[r - 1][c - 1] = t[2].parse().unwrap();
    }
    a
}

pub fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

pub fn read_vec(path: &Path) -> Vec<f64> {
    let rows = read_csv(path);
    if rows.len() == 1 {
        rows[0].clone()
    } else {
        rows.into_iter().map(|r| r[0]).collect()
    }
}

/// Dense rows and labels; `n` features.
pub fn read_libsvm(path: &Path, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for l in fs::read_to_string(path).unwrap().lines().filter(|l| !l.trim().is_empty()) {
        let mut t = l.split_whitespace();
        y.push(t.next().unwrap().parse().unwrap());
        let mut row = vec![0.0; n];
        for kv in t {
            let (k, v) = kv.split_once(':').unwrap();
            row[k.parse::<usize>().unwrap() - 1] = v.parse().unwrap();
        }
        x.push(row);
    }
    (x, y)
}

pub fn read_solution(path: &Path) -> Vec<f64> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.parse().unwrap()).collect()
}

fn spec_float(name: &str, table: &str, key: &str) -> f64 {
    let v: toml::Table = fs::read_to_string(spec_path(name)).unwrap().parse().unwrap();
    let x = &v[table][key];
    x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).unwrap()
}

// Dense helpers.

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(u, v)| u * v).sum()).collect()
}

pub fn tmatvec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = a.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (r, &w) in a.iter().zip(y) {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v * w;
        }
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Largest singular value squared.
pub fn spectral_sq(a: &[Vec<f64>]) -> f64 {
    let m = DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j]);
    (m.transpose() * &m).symmetric_eigenvalues().iter().copied().fold(0.0, f64::max)
}

fn log1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Accelerated proximal gradient with adaptive restart.
pub fn fista(
    grad: impl Fn(&[f64]) -> Vec<f64>,
    prox: impl Fn(&[f64], f64) -> Vec<f64>,
    lipschitz: f64,
    x0: Vec<f64>,
    iters: usize,
) -> Vec<f64> {
    let step = 1.0 / lipschitz;
    let mut x = x0.clone();
    let mut y = x0;
    let mut t = 1.0f64;
    for _ in 0..iters {
        let g = grad(&y);
        let arg: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * b).collect();
        let next = prox(&arg, step);
        let restart = y.iter().zip(&next).zip(&x).map(|((yk, n), xk)| (yk - n) * (n - xk)).sum::<f64>() > 0.0;
        if restart {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let w = (t - 1.0) / t_next;
        let moved = max_abs_diff(&next, &x);
        y = next.iter().zip(&x).map(|(n, xk)| n + w * (n - xk)).collect();
        x = next;
        t = t_next;
        if moved == 0.0 {
            break;
        }
    }
    x
}

/// What a fixture solution is checked against.
pub struct Oracle {
    pub objective: Box<dyn Fn(&[f64]) -> f64>,
    /// Largest constraint violation.
    pub violation: Box<dyn Fn(&[f64]) -> f64>,
    pub x_ref: Vec<f64>,
    /// Map applied before comparing points (identity when the solution is unique).
    pub compare: Box<dyn Fn(&[f64]) -> Vec<f64>>,
}

fn no_constraint() -> Box<dyn Fn(&[f64]) -> f64> {
    Box::new(|_| 0.0)
}

fn identity() -> Box<dyn Fn(&[f64]) -> Vec<f64>> {
    Box::new(|x| x.to_vec())
}

pub fn oracle(name: &str) -> Oracle {
    let dir = fixtures_dir().join(name);
    let data = fixtures_dir().join("data");
    match name {
        "lasso" => {
            let a = read_mtx(&dir.join("A.mtx"));
            let b = read_vec(&dir.join("b.csv"));
            let lam = spec_float(name, "g", "weights");
            let l = spectral_sq(&a);
            let (a2, b2) = (a.clone(), b.clone());
            let x = fista(
                |x| {
                    let r: Vec<f64> = matvec(&a2, x).iter().zip(&b2).map(|(u, v)| u - v).collect();
                    tmatvec(&a2, &r)
                },
                |v, s| v.iter().map(|&t| soft(t, s * lam)).collect(),
                l,
                vec![0.0; 10],
                200_000,
            );
            Oracle {
                objective: Box::new(move |x| {
                    let r: Vec<f64> = matvec(&a, x).iter().zip(&b).map(|(u, v)| u - v).collect();
                    0.5 * norm(&r).powi(2) + lam * x.iter().map(|v| v.abs()).sum::<f64>()
                }),
                violation: no_constraint(),
                x_ref: x,
                compare: identity(),
            }
        }
        "logistic" | "sparse_logistic" => {
            let (a, y) = read_libsvm(&data.join("binary.svm"), 8);
            // rows scaled by the labels
            let a: Vec<Vec<f64>> = a.iter().zip(&y).map(|(r, l)| r.iter().map(|v| v * l).collect()).collect();
            let w = spec_float(name, "g", "weights");
            let sparse = name == "sparse_logistic";
            let a2 = a.clone();
            let loss_grad = move |x: &[f64]| tmatvec(&a2, &matvec(&a2, x).iter().map(|&z| sigmoid(z)).collect::<Vec<_>>());
            let x = if sparse {
                fista(
                    loss_grad,
                    |v, s| v.iter().map(|&t| soft(t, s * w)).collect(),
                    spectral_sq(&a) / 4.0,
                    vec![0.0; 8],
                    200_000,
                )
            } else {
                // w‖x‖² is smooth; the prox is a scaling
                fista(
                    loss_grad,
                    |v, s| v.iter().map(|&t| t / (1.0 + 2.0 * s * w)).collect(),
                    spectral_sq(&a) / 4.0,
                    vec![0.0; 8],
                    200_000,
                )
            };
            Oracle {
                objective: Box::new(move |x| {
                    let loss: f64 = matvec(&a, x).iter().map(|&z| log1pexp(z)).sum();
                    let pen: f64 = if sparse {
                        x.iter().map(|v| v.abs()).sum()
                    } else {
                        x.iter().map(|v| v * v).sum()
                    };
                    loss + w * pen
                }),
                violation: no_constraint(),
                x_ref: x,
                compare: identity(),
            }
        }
        "svm" | "svm_intercept" => {
            let (x, y) = read_libsvm(&data.join("svm.svm"), 5);
            let reg = 2.0;
            let intercept = name == "svm_intercept";
            let alpha = if intercept {
                core_common::svm_smo(&x, &y, reg, 1e-13)
            } else {
                // projected gradient on [0, 1]ⁿ
                let z: Vec<Vec<f64>> = x.iter().zip(&y).map(|(r, l)| r.iter().map(|v| v * l).collect()).collect();
                let z2 = z.clone();
                fista(
                    move |a| {
                        let w = tmatvec(&z2, a);
                        matvec(&z2, &w).iter().map(|v| v / reg - 1.0).collect()
                    },
                    |v, _| v.iter().map(|t| t.clamp(0.0, 1.0)).collect(),
                    spectral_sq(&z) / reg,
                    vec![0.0; 20],
                    500_000,
                )
            };
            let (x2, y2) = (x.clone(), y.clone());
            let y3 = y.clone();
            Oracle {
                objective: Box::new(move |a| core_common::svm_dual_objective(&x2, &y2, reg, a)),
                violation: Box::new(move |a| {
                    let bx = a.iter().map(|v| (-v).max(v - 1.0).max(0.0)).fold(0.0, f64::max);
                    let eq = if intercept {
                        y3.iter().zip(a).map(|(u, v)| u * v).sum::<f64>().abs()
                    } else {
                        0.0
                    };
                    bx.max(eq)
                }),
                x_ref: alpha,
                compare: Box::new(move |a| svm_weights(&x, &y, a)),
            }
        }
        "qp" => {
            let f = read_mtx(&dir.join("Af.mtx"));
            let bf = read_vec(&dir.join("bf.csv"));
            let ah = read_csv(&dir.join("Ah.csv"));
            let bh = read_vec(&dir.join("bh.csv"));
            let n = f.len();
            // ½‖Fᵀx − bf‖² = ½xᵀFFᵀx − (F bf)ᵀx + const
            let q: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| f[i].iter().zip(&f[j]).map(|(u, v)| u * v).sum()).collect())
                .collect();
            let c: Vec<f64> = matvec(&f, &bf).iter().map(|v| -v).collect();
            let x = core_common::eq_qp_kkt(&q, &c, &ah, &bh);
            Oracle {
                objective: Box::new(move |x| {
                    let r: Vec<f64> = tmatvec(&f, x).iter().zip(&bf).map(|(u, v)| u - v).collect();
                    0.5 * norm(&r).powi(2)
                }),
                violation: Box::new(move |x| max_abs_diff(&matvec(&ah, x), &bh)),
                x_ref: x,
                compare: identity(),
            }
        }
        "lp" => {
            let a = read_csv(&dir.join("A.csv"));
            let b = read_vec(&dir.join("b.csv"));
            let c = read_vec(&dir.join("c.csv"));
            let (_, vertex) = core_common::lp_vertices(&c, &a, &b);
            Oracle {
                objective: Box::new(move |x| c.iter().zip(x).map(|(u, v)| u * v).sum()),
                violation: Box::new(move |x| {
                    let neg = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
                    matvec(&a, x).iter().zip(&b).map(|(u, v)| (u - v).max(0.0)).fold(neg, f64::max)
                }),
                x_ref: vertex,
                compare: identity(),
            }
        }
        "tv_l1" => tv_oracle(&dir, name),
        "multinomial" => multinomial_oracle(&dir, name),
        _ => panic!("no oracle for {name}"),
    }
}

fn svm_weights(x: &[Vec<f64>], y: &[f64], a: &[f64]) -> Vec<f64> {
    core_common::svm_weights(x, y, a)
}

/// Forward-difference rows grouped per pixel, rebuilt from the image shape.
fn tv_groups(side: usize) -> Vec<Vec<(usize, usize)>> {
    let mut groups = Vec::new();
    for i in 0..side {
        for j in 0..side {
            let k = i * side + j;
            let mut g = Vec::new();
            if i + 1 < side {
                g.push((k, k + side));
            }
            if j + 1 < side {
                g.push((k, k + 1));
            }
            if !g.is_empty() {
                groups.push(g);
            }
        }
    }
    groups
}

fn tv_oracle(dir: &Path, name: &str) -> Oracle {
    let a = read_mtx(&dir.join("A.mtx"));
    let b = read_vec(&dir.join("b.csv"));
    let a1 = spec_float(name, "h", "weights");
    let a2 = spec_float(name, "g", "weights");
    let groups = tv_groups(4);
    let n = 16;
    let dx = |x: &[f64]| -> Vec<Vec<f64>> {
        groups.iter().map(|g| g.iter().map(|&(p, q)| x[q] - x[p]).collect()).collect()
    };
    let dt = |y: &[Vec<f64>]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (g, yg) in groups.iter().zip(y) {
            for (&(p, q), v) in g.iter().zip(yg) {
                out[q] += v;
                out[p] -= v;
            }
        }
        out
    };
    // primal-dual splitting with a gradient step on the smooth part
    let lf = spectral_sq(&a);
    let sigma = 1.0;
    let tau = 0.99 / (lf / 2.0 + sigma * 8.0);
    let mut x = vec![0.0; n];
    let mut y: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.len()]).collect();
    for _ in 0..400_000 {
        let r: Vec<f64> = matvec(&a, &x).iter().zip(&b).map(|(u, v)| u - v).collect();
        let g = tmatvec(&a, &r);
        let d = dt(&y);
        let xn: Vec<f64> = (0..n).map(|k| soft(x[k] - tau * (g[k] + d[k]), tau * a2)).collect();
        let xb: Vec<f64> = xn.iter().zip(&x).map(|(u, v)| 2.0 * u - v).collect();
        let dxb = dx(&xb);
        for (yg, dg) in y.iter_mut().zip(&dxb) {
            let v: Vec<f64> = yg.iter().zip(dg).map(|(u, w)| u + sigma * w).collect();
            let s = (norm(&v) / a1).max(1.0);
            *yg = v.iter().map(|t| t / s).collect();
        }
        x = xn;
    }
    let objective = move |x: &[f64]| {
        let r: Vec<f64> = matvec(&a, x).iter().zip(&b).map(|(u, v)| u - v).collect();
        let tv: f64 = tv_groups(4)
            .iter()
            .map(|g| norm(&g.iter().map(|&(p, q)| x[q] - x[p]).collect::<Vec<_>>()))
            .sum();
        0.5 * norm(&r).powi(2) + a1 * tv + a2 * x.iter().map(|v| v.abs()).sum::<f64>()
    };
    Oracle {
        objective: Box::new(objective),
        violation: no_constraint(),
        x_ref: x,
        compare: identity(),
    }
}

fn multinomial_oracle(dir: &Path, name: &str) -> Oracle {
    let a = read_csv(&dir.join("features.csv"));
    let labels: Vec<usize> = read_vec(&dir.join("labels.csv")).iter().map(|v| *v as usize).collect();
    let lam = spec_float(name, "g", "weights");
    let (nf, q) = (a[0].len(), 3);
    let scores = {
        let a = a.clone();
        move |x: &[f64]| -> Vec<Vec<f64>> {
            a.iter()
                .map(|row| (0..q).map(|j| (0..nf).map(|l| row[l] * x[l * q + j]).sum()).collect())
                .collect()
        }
    };
    let grad = {
        let (a, labels, scores) = (a.clone(), labels.clone(), scores.clone());
        move |x: &[f64]| {
            let mut g = vec![0.0; nf * q];
            for (i, z) in scores(x).iter().enumerate() {
                let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                for j in 0..q {
                    let coef = e[j] / s - if labels[i] == j { 1.0 } else { 0.0 };
                    for l in 0..nf {
                        g[l * q + j] += a[i][l] * coef;
                    }
                }
            }
            g
        }
    };
    let prox = move |v: &[f64], s: f64| {
        let mut out = v.to_vec();
        for l in 0..nf {
            let blk = &mut out[l * q..(l + 1) * q];
            let nrm = norm(blk);
            let k = if nrm > s * lam { 1.0 - s * lam / nrm } else { 0.0 };
            blk.iter_mut().for_each(|t| *t *= k);
        }
        out
    };
    let l: f64 = a.iter().flatten().map(|v| v * v).sum();
    let x = fista(grad, prox, l, vec![0.0; nf * q], 200_000);
    Oracle {
        objective: Box::new(move |x| {
            let mut v = 0.0;
            for (i, z) in scores(x).iter().enumerate() {
                let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                v += m + z.iter().map(|t| (t - m).exp()).sum::<f64>().ln() - z[labels[i]];
            }
            v + lam * (0..nf).map(|l| norm(&x[l * q..(l + 1) * q])).sum::<f64>()
        }),
        violation: no_constraint(),
        x_ref: x,
        compare: identity(),
    }
}

/// Outcome of solving a fixture through the binary, compared with its oracle.
#[derive(Debug)]
pub struct FixtureReport {
    pub objective_error: f64,
    pub point_error: f64,
    pub violation: f64,
}

pub const OBJECTIVE_TOL: f64 = 1e-6;
pub const POINT_TOL: f64 = 1e-4;
pub const VIOLATION_TOL: f64 = 1e-6;

/// Solves `name` with `algo`; `Err` describes the first failed check.
pub fn check_fixture(name: &str, algo: &str, oracle: &Oracle) -> Result<FixtureReport, String> {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("x.vec");
    let spec = spec_path(name);
    let out = run_cli(&["solve", spec.to_str().unwrap(), "--algo", algo, "--solution", sol.to_str().unwrap()]);
    if out.status.code() != Some(0) {
        return Err(format!(
            "exit {:?}: {}{}",
            out.status.code(),
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let x = read_solution(&sol);
    let p_ref = (oracle.objective)(&oracle.x_ref);
    let p = (oracle.objective)(&x);
    let report = FixtureReport {
        objective_error: (p - p_ref).abs() / p_ref.abs().max(1.0),
        point_error: max_abs_diff(&(oracle.compare)(&x), &(oracle.compare)(&oracle.x_ref)),
        violation: (oracle.violation)(&x),
    };
    if report.objective_error > OBJECTIVE_TOL || report.point_error > POINT_TOL || report.violation > VIOLATION_TOL {
        return Err(format!("{report:?} (objective {p} vs {p_ref})"));
    }
    Ok(report)
}
