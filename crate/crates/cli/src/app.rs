//! Command-line interface.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use cdsolve::{coordinate_descent, Algorithm, Problem, SamplingKind, SolveStatus, SolverError};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::load::load_spec;

/// Exit code for a converged solve, or a successful check.
pub const EXIT_OK: i32 = 0;
/// The solver stopped on its budget before reaching the tolerance.
pub const EXIT_NOT_CONVERGED: i32 = 1;
/// The input could not be used.
pub const EXIT_INPUT: i32 = 2;

/// Reserved for future parallel solves; must be unset or 1.
pub const THREADS_ENV: &str = "CD_SOLVER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cdsolve", version, about = "Primal-dual coordinate descent for structured convex problems")]
pub struct Cli {
    /// More log output (repeat for debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem described by a problem file
    Solve(SolveArgs),
    /// Check a problem file and its data files without solving
    Validate { spec: PathBuf },
    /// Print problem dimensions
    Describe { spec: PathBuf },
}

#[derive(Debug, Args)]
struct SolveArgs {
    spec: PathBuf,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    /// Target smoothed gap
    #[arg(long)]
    tol: Option<f64>,
    /// Epoch budget
    #[arg(long)]
    max_iter: Option<u64>,
    /// Time budget in seconds
    #[arg(long)]
    max_time: Option<f64>,
    #[arg(long, value_enum)]
    sampling: Option<SamplingArg>,
    #[arg(long, value_enum)]
    screening: Option<Switch>,
    #[arg(long)]
    seed: Option<u64>,
    /// Checkpoint history, CSV (or JSON with a .json extension)
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Final primal point, one value per line
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgoArg {
    Pdcd,
    Smartcd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplingArg {
    Uniform,
    #[value(name = "kink_half")]
    KinkHalf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    init_logging(cli.verbose);
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
}

struct Failure {
    code: i32,
    message: String,
}

fn input_error(e: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    }
}

fn check_threads() -> Result<(), Failure> {
    match std::env::var_os(THREADS_ENV) {
        None => Ok(()),
        Some(v) if v.to_str().map(str::trim) == Some("1") => Ok(()),
        Some(v) => Err(input_error(format!(
            "{THREADS_ENV}={} is not supported; only single-threaded solves are available (unset it or set it to 1)",
            v.to_string_lossy()
        ))),
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    check_threads()?;
    let io_err = |e: io::Error| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    };
    match cmd {
        Command::Validate { spec } => {
            load_spec(&spec).map_err(input_error)?;
            writeln!(out, "{}: ok", spec.display()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Describe { spec } => {
            let loaded = load_spec(&spec).map_err(input_error)?;
            out.write_all(describe(&loaded.problem).as_bytes()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Solve(args) => solve(args, out),
    }
}

fn solve(args: SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let loaded = load_spec(&args.spec).map_err(input_error)?;
    let mut options = loaded.options;
    if let Some(a) = args.algo {
        options.algorithm = match a {
            AlgoArg::Pdcd => Algorithm::Pdcd,
            AlgoArg::Smartcd => Algorithm::Smartcd,
        };
    }
    if let Some(t) = args.tol {
        options.tol = t;
    }
    if let Some(m) = args.max_iter {
        options.max_iter = m;
    }
    if let Some(t) = args.max_time {
        options.max_time = Some(Duration::try_from_secs_f64(t).map_err(|e| input_error(format!("--max-time: {e}")))?);
    }
    if let Some(s) = args.sampling {
        options.sampling = match s {
            SamplingArg::Uniform => SamplingKind::Uniform,
            SamplingArg::KinkHalf => SamplingKind::KinkHalf,
        };
    }
    if let Some(s) = args.screening {
        options.screening = matches!(s, Switch::On);
    }
    if let Some(s) = args.seed {
        options.seed = s;
    }

    let result = coordinate_descent(&loaded.problem, &options).map_err(|e| match e {
        SolverError::NonFinite { .. } => Failure {
            code: EXIT_NOT_CONVERGED,
            message: e.to_string(),
        },
        _ => input_error(e),
    })?;

    let write_err = |path: &Path, e: io::Error| input_error(format!("{}: {e}", path.display()));
    if let Some(path) = &args.solution {
        fs::write(path, format_solution(&result.x)).map_err(|e| write_err(path, e))?;
    }
    if let Some(path) = &args.trace {
        result.trace.save(path).map_err(|e| write_err(path, e))?;
    }
    let status = match result.status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIter => "iteration budget exhausted",
        SolveStatus::MaxTime => "time budget exhausted",
    };
    let mut summary = format!("status: {status}\nepochs: {}\niterations: {}\n", result.epochs, result.iterations);
    if let Some(r) = result.trace.last() {
        summary += &format!(
            "objective: {:e}\ngap: {:e}\ninfeasibility: {:e}\nscreened: {}\n",
            r.objective, r.gap, r.infeasibility, r.screened
        );
    }
    if args.solution.is_none() {
        summary += &format_solution(&result.x);
    }
    out.write_all(summary.as_bytes())
        .map_err(|e| input_error(e.to_string()))?;
    Ok(if result.converged() { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

/// One value per line with 17 significant digits.
pub fn format_solution(x: &[f64]) -> String {
    let mut s = String::with_capacity(x.len() * 24);
    for v in x {
        s += &format!("{v:.16e}\n");
    }
    s
}

/// `key: value` lines with the problem dimensions.
pub fn describe(p: &Problem<f64>) -> String {
    let f = p.f();
    let h = p.h();
    let nnz_q = p.q().map_or(0, |q| q.nnz());
    let blocks = if p.blocks().is_scalar() { " (scalar)" } else { "" };
    let lines = [
        ("N", p.n().to_string()),
        ("I", format!("{}{blocks}", p.n_blocks())),
        ("J", f.len().to_string()),
        ("L", h.len().to_string()),
        ("rows f", f.dim().to_string()),
        ("rows h", h.dim().to_string()),
        ("nnz Af", f.matrix.nnz().to_string()),
        ("nnz Ah", h.matrix.nnz().to_string()),
        ("nnz Q", nnz_q.to_string()),
        ("nnz", (f.matrix.nnz() + h.matrix.nnz() + nnz_q).to_string()),
        ("duplication size", p.duplication().len().to_string()),
    ];
    lines.iter().map(|(k, v)| format!("{k}: {v}\n")).collect()
}
