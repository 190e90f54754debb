//! File-based front end for the `cdsolve` solver.
//!
//! A problem file is a TOML document with a `[problem]` table, optional
//! `[f]`, `[g]`, `[h]`, `[q]` terms and an `[options]` table; see `SCHEMA.md`.
//! [`load_problem`] turns it into a [`cdsolve::Problem`] and [`run`] is the
//! `cdsolve` binary.

mod app;
mod error;
mod load;
pub mod readers;
pub mod spec;

pub use app::{describe, format_solution, run, Cli, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, THREADS_ENV};
pub use error::LoadError;
pub use load::{load_problem, load_spec, parse_spec, LoadedSpec};
