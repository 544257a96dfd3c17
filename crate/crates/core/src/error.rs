use std::path::PathBuf;

use thiserror::Error;

use crate::eigen::NonConvergence;
use crate::expr::EvalError;
use crate::gamma::GammaDomainError;
use crate::problem::SpecError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Gamma(#[from] GammaDomainError),
    #[error("invalid interval endpoint b = {b}: {reason}")]
    InvalidB { b: f64, reason: String },
    #[error("grid with {n} nodes is too small (need an odd count of at least {min})")]
    GridTooSmall { n: usize, min: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fixed-point iteration did not converge after {} iterations (last step {:.3e})", .0.iterations, .0.last_step)]
    NonConvergence(Box<NonConvergence>),
    #[error("operator norm vanished at iteration {iteration}; T has no eigenpair on this sphere")]
    BreakdownZeroNorm { iteration: usize },
    #[error("localization hypothesis fails at rho = {rho}: lower-bound denominator {denominator} is not positive")]
    HypothesisFail { rho: f64, denominator: f64 },
    #[error("inconsistent override `{field}`: {detail}")]
    InconsistentOverride { field: &'static str, detail: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Format { path: PathBuf, line: usize, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
