//! File formats, report serialization and synthetic data.

mod config;
mod delimited;
mod report;
mod synthetic;
mod uep;

use std::path::PathBuf;

use thiserror::Error;

use crate::estimator::EstimatorError;

pub use config::{InputFormat, OutputFormat, ParseOptionError, RunConfig, Unit, ViewSelection};
pub use delimited::{
    read_csv, read_csv_from, read_truth, read_truth_from, write_csv, write_csv_to,
};
pub use report::{format_number, write_detection_report, write_lab_table, write_measure_table};
pub use synthetic::{generate_synthetic, SyntheticConfig};
pub use uep::{read_uep, read_uep_from, write_uep, write_uep_to, UEP_MAGIC};

/// Reads a batch, choosing the format from the extension (`.csv` or UEP).
pub fn read_batch(path: &std::path::Path) -> Result<crate::estimator::EnsembleBatch, IoError> {
    match InputFormat::from_path(path) {
        InputFormat::Csv => read_csv(path),
        InputFormat::Uep => read_uep(path),
    }
}

/// Writes a batch, choosing the format from the extension (`.csv` or UEP).
pub fn write_batch(
    batch: &crate::estimator::EnsembleBatch,
    path: &std::path::Path,
) -> Result<(), IoError> {
    match InputFormat::from_path(path) {
        InputFormat::Csv => write_csv(batch, path),
        InputFormat::Uep => write_uep(batch, path),
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {found:?}, expected \"UEP1\"")]
    BadMagic { found: [u8; 4] },
    #[error("truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("unknown flag bits {0:#010b}")]
    UnknownFlags(u8),
    #[error("{extra} unexpected bytes after the footer")]
    TrailingBytes { extra: u64 },
    #[error("sum-check failed: footer says {footer} payload bytes, header implies {expected}")]
    SumCheck { footer: u64, expected: u64 },
    #[error("input {input}, member {member}: probabilities sum to {sum}")]
    RowSum { input: usize, member: usize, sum: f64 },
    #[error("input {input}, member {member}, class {class}: invalid probability {value}")]
    InvalidProbability {
        input: usize,
        member: usize,
        class: usize,
        value: f64,
    },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Batch(#[from] EstimatorError),
}

impl IoError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::File { .. } | IoError::Io(_) => "io",
            IoError::BadMagic { .. } => "bad-magic",
            IoError::Truncated { .. } => "truncated",
            IoError::UnknownFlags(_) => "flags",
            IoError::TrailingBytes { .. } => "trailing-bytes",
            IoError::SumCheck { .. } => "sum-check",
            IoError::RowSum { .. } => "row-sum",
            IoError::InvalidProbability { .. } => "invalid-probability",
            IoError::Csv { .. } => "csv",
            IoError::Batch(_) => "batch",
        }
    }

    pub(crate) fn file(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
        move |source| IoError::File {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Row sums within this distance of 1 are accepted and renormalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Validates and, where needed, renormalizes one `K`-slice in place.
pub(crate) fn check_row(row: &mut [f64], input: usize, member: usize) -> Result<(), IoError> {
    for (class, &value) in row.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(IoError::InvalidProbability {
                input,
                member,
                class,
                value,
            });
        }
    }
    let sum = crate::sum::compensated_sum(row.iter().copied());
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(IoError::RowSum { input, member, sum });
    }
    if (sum - 1.0).abs() > 1e-12 {
        row.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}
