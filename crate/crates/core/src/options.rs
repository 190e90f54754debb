//! Solver configuration and results.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Trace;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Primal-dual coordinate descent with duplicated dual variables.
    #[default]
    Pdcd,
    /// Accelerated, smoothed coordinate descent with restart.
    #[serde(alias = "smart-cd", alias = "approx")]
    Smartcd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    #[default]
    Uniform,
    /// Half of the draws go to blocks not sitting at a kink of their atom.
    KinkHalf,
}

/// When the accelerated method restarts its momentum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartPolicy {
    /// Every `p` iterations.
    FixedPeriod(u64),
    /// Periods `p0, 2p0, 4p0, …`; `None` means `p0 = 2·I`.
    Doubling(Option<u64>),
}

impl Default for RestartPolicy {
    fn default() -> Self {
        RestartPolicy::Doubling(None)
    }
}

/// Options shared by both algorithms. Iteration budgets count epochs, one
/// epoch being as many block updates as there are active blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub algorithm: Algorithm,
    pub max_iter: u64,
    #[serde(with = "opt_secs")]
    pub max_time: Option<Duration>,
    /// Stop once the smoothed gap and both smoothing parameters are below this.
    pub tol: f64,
    /// Epochs between stopping checks and trace records.
    pub print_period: u64,
    pub sampling: SamplingKind,
    pub seed: u64,
    /// Fraction of the largest admissible primal step.
    pub safety: f64,
    /// Dual steps, one per h-block, replacing the default rule.
    pub sigma: Option<Vec<f64>>,
    /// Block updates between full residual recomputations; `None` means `10·I`.
    pub refresh_period: Option<u64>,
    pub screening: bool,
    /// Epochs between screening tests.
    pub screening_period: u64,
    /// Initial smoothing of the accelerated method; `None` means the largest
    /// column norm of `A_h`.
    pub gamma1: Option<f64>,
    pub restart: RestartPolicy,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Pdcd,
            max_iter: 1000,
            max_time: None,
            tol: 1e-6,
            print_period: 10,
            sampling: SamplingKind::Uniform,
            seed: 0,
            safety: 0.95,
            sigma: None,
            refresh_period: None,
            screening: false,
            screening_period: 10,
            gamma1: None,
            restart: RestartPolicy::default(),
        }
    }
}

mod opt_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Option::<f64>::deserialize(d)?
            .map(|v| Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    MaxTime,
}

#[derive(Clone, Debug)]
pub struct SolveResult<T> {
    pub x: Vec<T>,
    /// Duplicated dual vector (primal-dual method) or dual anchor (accelerated).
    pub y: Vec<T>,
    /// Dual estimate, one value per row of `A_h`.
    pub y_bar: Vec<T>,
    pub status: SolveStatus,
    pub epochs: u64,
    pub iterations: u64,
    pub trace: Trace,
    /// Blocks fixed by screening.
    pub screened: Vec<bool>,
}

impl<T> SolveResult<T> {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}
