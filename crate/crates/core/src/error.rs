use std::path::PathBuf;

use thiserror::Error;

use crate::benefit::BenefitError;
use crate::callgraph::GraphError;
use crate::catalog::CatalogError;
use crate::cve::CveError;
use crate::idl::IdlError;
use crate::ledger::LedgerError;
use crate::policy::PolicyError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Idl { path: PathBuf, source: IdlError },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cve(#[from] CveError),
    #[error(transparent)]
    Benefit(#[from] BenefitError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("manifest: {0}")]
    Manifest(String),
    /// Bad command-line arguments or options.
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }

    /// 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        if self.is_io() {
            2
        } else {
            1
        }
    }

    /// Attaches a file path to a validation error raised while reading it.
    pub fn at(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Input {
            path: path.into(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
