use std::io;
use std::path::{Path, PathBuf};

use cdsolve::{AtomError, ModelError};
use thiserror::Error;

/// Why a problem file could not be turned into a problem.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path}: file not found (referenced by `{key}`)")]
    MissingFile { path: PathBuf, key: String },
    #[error("{path}: cannot read (referenced by `{key}`): {source}")]
    Io {
        path: PathBuf,
        key: String,
        source: io::Error,
    },
    #[error("{path}{}: {message}", line_suffix(*.line))]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
    #[error("dimension mismatch at `{key}`: {message}")]
    Dimension { key: String, message: String },
    #[error("at `{key}`: {source}")]
    UnknownAtom { key: String, source: AtomError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn line_suffix(line: Option<u64>) -> String {
    line.map_or_else(String::new, |l| format!(":{l}"))
}

impl LoadError {
    pub(crate) fn file(path: &Path, key: &str, e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::NotFound {
            LoadError::MissingFile {
                path: path.to_path_buf(),
                key: key.to_string(),
            }
        } else {
            LoadError::Io {
                path: path.to_path_buf(),
                key: key.to_string(),
                source: e,
            }
        }
    }

    pub(crate) fn parse(path: &Path, line: Option<u64>, message: impl Into<String>) -> Self {
        LoadError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn dim(key: impl Into<String>, message: impl Into<String>) -> Self {
        LoadError::Dimension {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn schema(path: &Path, message: impl Into<String>) -> Self {
        LoadError::Schema {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}
