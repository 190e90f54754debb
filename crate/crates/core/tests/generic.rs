mod common;

use cdsolve::state::{dual_aggregates, SolverState};
use cdsolve::{coordinate_descent, Algorithm, Problem, Problem32, SolverOptions};
use proptest::prelude::*;

#[test]
fn single_precision_lasso() {
    let p: Problem32 = Problem::builder(2)
        .f(vec!["square"; 2])
        .cf(vec![0.5f32; 2])
        .af(vec![vec![1.0f32, 0.0], vec![0.0, 1.0]])
        .bf(vec![2.0f32, 0.25])
        .g(vec!["abs"; 2])
        .cg(vec![0.5f32; 2])
        .build()
        .unwrap();
    for algo in [Algorithm::Pdcd, Algorithm::Smartcd] {
        let o = SolverOptions { algorithm: algo, tol: 1e-5, ..Default::default() };
        let res = coordinate_descent(&p, &o).unwrap();
        assert!(res.converged());
        assert!((res.x[0] - 1.5).abs() < 1e-5 && res.x[1].abs() < 1e-5, "{:?}", res.x);
    }
}

#[test]
fn single_precision_constrained_problem() {
    // min x0² + x1² subject to x0 + x1 = 1
    let p = Problem::<f32>::builder(2)
        .q(vec![vec![2.0f32, 0.0], vec![0.0, 2.0]])
        .h(vec!["eq"])
        .ah(vec![vec![1.0f32, 1.0]])
        .bh(vec![1.0f32])
        .build()
        .unwrap();
    let o = SolverOptions { tol: 1e-4, max_iter: 100_000, ..Default::default() };
    let res = coordinate_descent(&p, &o).unwrap();
    assert!(res.converged(), "{:?}", res.trace.last());
    assert!((res.x[0] - 0.5).abs() < 1e-3 && (res.x[1] - 0.5).abs() < 1e-3);
}

fn arb_problem() -> impl Strategy<Value = (Problem<f64>, Vec<(usize, f64, f64)>)> {
    (2usize..12, 1usize..8, 1usize..6, any::<u64>()).prop_flat_map(|(n, mf, mh, seed)| {
        let mut r = common::rng(seed);
        let p = common::random_full(&mut r, n, mf, mh, 3 * n, 3);
        let nb = p.n_blocks();
        let ops = proptest::collection::vec((0..nb, -5.0f64..5.0, -5.0f64..5.0), 0..200);
        (Just(p), ops)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_follow_any_update_sequence((p, ops) in arb_problem()) {
        let mut s = SolverState::new(&p);
        for (i, xv, yv) in ops {
            let x_new: Vec<f64> = p.blocks().range(i).map(|c| xv + c as f64 * 0.1).collect();
            let ybar = vec![yv; p.h().dim()];
            s.apply_primal_update(&p, i, &x_new);
            s.apply_dual_update(&p, i, &ybar);
        }
        let f = p.f();
        let mut rf = f.matrix.mul_vec(&s.x);
        rf.iter_mut().zip(&f.offset).for_each(|(v, b)| *v -= b);
        prop_assert!(common::max_abs_diff(&rf, &s.r_f) <= 1e-9);
        prop_assert!(common::max_abs_diff(&p.h().matrix.mul_vec(&s.x), &s.r_h) <= 1e-9);
        let (w, z) = dual_aggregates(&p, &s.y);
        prop_assert!(common::max_abs_diff(&w, &s.w) <= 1e-9);
        prop_assert!(common::max_abs_diff(&z, &s.z) <= 1e-9);
    }

    #[test]
    fn step_sizes_are_positive_and_finite((p, _ops) in arb_problem(), safety in 0.05f64..0.99) {
        let s = cdsolve::compute_step_sizes(&p, safety, None).unwrap();
        prop_assert!(s.tau.iter().all(|t| *t > 0.0 && t.is_finite()));
        prop_assert!(s.sigma.iter().all(|t| *t > 0.0 && t.is_finite()));
    }
}
