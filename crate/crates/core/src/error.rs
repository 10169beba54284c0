use thiserror::Error;

use crate::bernoulli::LabError;
use crate::estimator::EstimatorError;
use crate::eval::EvalError;
use crate::io::IoError;
use crate::measures::MeasureError;

/// Broad class of a failure, used to choose process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Invalid arguments or configuration.
    Usage,
    /// Unreadable, malformed or inconsistent input data.
    Data,
    /// A computation failed to converge or broke an identity.
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
    #[error("identity check failed: {0}")]
    Audit(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Measure(_) => ErrorKind::Data,
            Error::Lab(LabError::InvalidPosterior(_)) => ErrorKind::Usage,
            Error::Lab(LabError::Infeasible { .. }) => ErrorKind::Usage,
            Error::Lab(_) => ErrorKind::Numerical,
            Error::Estimator(EstimatorError::Epsilon { .. })
            | Error::Estimator(EstimatorError::SubsetSize { .. })
            | Error::Estimator(EstimatorError::TooFewResamples(_)) => ErrorKind::Usage,
            Error::Estimator(EstimatorError::NonFinite(_)) => ErrorKind::Numerical,
            Error::Estimator(_) => ErrorKind::Data,
            Error::Eval(EvalError::NoSplits) | Error::Eval(EvalError::SplitTooLarge { .. }) => {
                ErrorKind::Usage
            }
            Error::Eval(_) => ErrorKind::Data,
            Error::Io(IoError::Batch(EstimatorError::Epsilon { .. })) => ErrorKind::Usage,
            Error::Io(_) => ErrorKind::Data,
            Error::Usage(_) => ErrorKind::Usage,
            Error::Audit(_) => ErrorKind::Numerical,
        }
    }
}
