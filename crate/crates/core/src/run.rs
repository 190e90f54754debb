//! Epoch loop shared by both algorithms: residual refresh, kink detection,
//! screening, checkpoints and stopping.

use std::time::Instant;

use crate::atoms::AtomError;
use crate::diagnostics::{evaluate, Trace, TraceRow};
use crate::error::SolverError;
use crate::model::Problem;
use crate::options::{SamplingKind, SolveResult, SolveStatus, SolverOptions};
use crate::scalar::Scalar;
use crate::screening::Screener;

/// What the driver needs from an algorithm.
pub(crate) trait Engine<T: Scalar> {
    fn n_active(&self) -> usize;
    /// One block update.
    fn step(&mut self) -> Result<(), SolverError>;
    /// Recomputes incrementally maintained vectors from scratch.
    fn refresh(&mut self);
    fn refresh_kinks(&mut self);
    /// Current primal estimate.
    fn output(&self) -> Vec<T>;
    /// Dual estimate, one value per row of `A_h`.
    fn dual_estimate(&self) -> Result<Vec<T>, AtomError>;
    /// Sets the given blocks to their final values and stops sampling them.
    fn fix_blocks(&mut self, fixed: &[(usize, Vec<T>)]);
    fn dual_vector(&self) -> Vec<T>;
    fn iterations(&self) -> u64;
}

pub(crate) fn check_options(options: &SolverOptions) -> Result<(), SolverError> {
    let bad = |m: &str| Err(SolverError::InvalidOption(m.to_string()));
    if !(options.tol >= 0.0 && options.tol.is_finite()) {
        return bad("tol must be finite and nonnegative");
    }
    if options.print_period == 0 {
        return bad("print_period must be at least 1");
    }
    if options.screening_period == 0 {
        return bad("screening_period must be at least 1");
    }
    if options.refresh_period == Some(0) {
        return bad("refresh_period must be at least 1");
    }
    Ok(())
}

pub(crate) fn drive<T: Scalar, E: Engine<T>>(
    engine: &mut E,
    p: &Problem<T>,
    options: &SolverOptions,
) -> Result<SolveResult<T>, SolverError> {
    check_options(options)?;
    let start = Instant::now();
    let refresh_period = options
        .refresh_period
        .unwrap_or(10 * p.n_blocks() as u64)
        .max(1);
    let mut screener = if options.screening {
        let s = Screener::new(p)?;
        if s.is_none() {
            log::info!("screening requested but unavailable for this problem");
        }
        s
    } else {
        None
    };
    let kink_aware = options.sampling == SamplingKind::KinkHalf;
    let tol = T::lit(options.tol);
    let mut trace = Trace::default();
    let mut since_refresh = 0u64;
    let mut epoch = 0u64;
    let mut status = SolveStatus::MaxIter;

    let checkpoint = |engine: &E, epoch: u64, screened: usize, trace: &mut Trace| -> Result<bool, SolverError> {
        let x = engine.output();
        let y = engine.dual_estimate()?;
        let r = evaluate(p, &x, &y)?;
        let row = TraceRow {
            epoch,
            elapsed: start.elapsed().as_secs_f64(),
            objective: r.objective.to_f64_lossy(),
            gap: r.gap.to_f64_lossy(),
            beta: r.beta.to_f64_lossy(),
            gamma: r.gamma.to_f64_lossy(),
            infeasibility: r.infeasibility.to_f64_lossy(),
            screened: screened as u64,
        };
        log::debug!(
            "epoch {epoch}: objective {:e} gap {:e} beta {:e} gamma {:e}",
            row.objective,
            row.gap,
            row.beta,
            row.gamma
        );
        trace.push(row);
        Ok(r.within(tol))
    };

    loop {
        if epoch >= options.max_iter {
            break;
        }
        if options.max_time.is_some_and(|t| start.elapsed() >= t) {
            status = SolveStatus::MaxTime;
            break;
        }
        let n = engine.n_active();
        if n == 0 {
            // every block fixed by screening
            status = SolveStatus::Converged;
            break;
        }
        for _ in 0..n {
            engine.step()?;
            since_refresh += 1;
            if since_refresh >= refresh_period {
                engine.refresh();
                since_refresh = 0;
            }
        }
        epoch += 1;
        if kink_aware {
            engine.refresh_kinks();
        }
        if let Some(s) = screener.as_mut() {
            if epoch % options.screening_period == 0 {
                let round = s.screen(p, &engine.output())?;
                if !round.fixed.is_empty() {
                    log::debug!("epoch {epoch}: screened {} blocks", round.fixed.len());
                    engine.fix_blocks(&round.fixed);
                }
            }
        }
        if epoch % options.print_period == 0 {
            let screened = screener.as_ref().map_or(0, Screener::n_screened);
            if checkpoint(engine, epoch, screened, &mut trace)? {
                status = SolveStatus::Converged;
                break;
            }
        }
    }

    let screened = screener.as_ref().map_or(0, Screener::n_screened);
    if trace.last().map(|r| r.epoch) != Some(epoch) || trace.rows.is_empty() {
        let ok = checkpoint(engine, epoch, screened, &mut trace)?;
        if ok {
            status = SolveStatus::Converged;
        }
    }
    let x = engine.output();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite {
            what: "final iterate",
            iteration: engine.iterations(),
        });
    }
    Ok(SolveResult {
        x,
        y: engine.dual_vector(),
        y_bar: engine.dual_estimate()?,
        status,
        epochs: epoch,
        iterations: engine.iterations(),
        trace,
        screened: screener.map_or_else(|| vec![false; p.n_blocks()], |s| s.screened_mask()),
    })
}
