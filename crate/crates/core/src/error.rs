use thiserror::Error;

use crate::atoms::AtomError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("non-finite value in {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: u64 },
    #[error("invalid option: {0}")]
    InvalidOption(String),
}
