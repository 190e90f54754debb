//! Coordinate descent for structured nonsmooth convex problems
//!
//! ```text
//! min_x ½xᵀQx + Σ_j cf_j f_j(Af_j x − bf_j) + Σ_i cg_i g_i(Dg_i x_i − bg_i) + Σ_l ch_l h_l(Ah_l x − bh_l)
//! ```
//!
//! The problem is assembled with [`Problem::builder`] from atom names such as
//! `"square"` or `"abs"` and solved by [`coordinate_descent`].
//!
//! ```
//! use cdsolve::{coordinate_descent, Problem, SolverOptions};
//!
//! // lasso: ½‖x − b‖² + 0.5‖x‖₁ with an identity design
//! let p = Problem::<f64>::builder(2)
//!     .f(vec!["square"; 2])
//!     .cf(vec![0.5; 2])
//!     .af(vec![vec![1.0, 0.0], vec![0.0, 1.0]])
//!     .bf(vec![2.0, 0.25])
//!     .g(vec!["abs"; 2])
//!     .cg(vec![0.5; 2])
//!     .build()
//!     .unwrap();
//! let opts = SolverOptions { tol: 1e-10, ..Default::default() };
//! let res = coordinate_descent(&p, &opts).unwrap();
//! assert!((res.x[0] - 1.5).abs() < 1e-8 && res.x[1].abs() < 1e-8);
//! ```

pub mod accel;
pub mod atoms;
pub mod diagnostics;
mod error;
pub mod linalg;
pub mod model;
mod options;
pub mod pdcd;
mod run;
pub mod scalar;
pub mod screening;
pub mod state;

pub use accel::{run_accel, theta_next, AccelState, RestartSchedule};
pub use atoms::{Atom, AtomCatalog, AtomError, AtomMode, AtomRef};
pub use diagnostics::{GapReport, Trace, TraceRow};
pub use error::SolverError;
pub use model::{CscMatrix, BlockStructure, DualDuplicationIndex, ModelError, Problem, ProblemBuilder};
pub use options::{Algorithm, RestartPolicy, SamplingKind, SolveResult, SolveStatus, SolverOptions};
pub use pdcd::{compute_step_sizes, Pdcd, StepSizes};
pub use scalar::Scalar;
pub use screening::Screener;
pub use state::SolverState;

/// Solves `problem` with the algorithm selected in `options`.
pub fn coordinate_descent<T: Scalar>(
    problem: &Problem<T>,
    options: &SolverOptions,
) -> Result<SolveResult<T>, SolverError> {
    match options.algorithm {
        Algorithm::Pdcd => pdcd::run(problem, options),
        Algorithm::Smartcd => accel::run_accel(problem, options),
    }
}

pub type Problem64 = Problem<f64>;
pub type Problem32 = Problem<f32>;
pub type SolveResult64 = SolveResult<f64>;
pub type SolveResult32 = SolveResult<f32>;
pub type CscMatrix64 = CscMatrix<f64>;
pub type CscMatrix32 = CscMatrix<f32>;
