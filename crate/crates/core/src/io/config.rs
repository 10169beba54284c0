use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::measures::View;

/// Columns written for a measure table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViewSelection {
    /// Both decompositions plus RMI.
    #[default]
    All,
    Only(View),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Unit for entropy-like outputs. Values are held in nats and converted only
/// when printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    pub fn name(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Uep,
    Csv,
}

impl InputFormat {
    /// `.csv` (any case) is CSV; everything else is UEP.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Uep,
        }
    }
}

/// Settings shared by every run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub view: ViewSelection,
    /// Probability floor applied before scoring; 0 leaves inputs untouched.
    /// Around `1e-12` is a reasonable guard for probabilities that came from
    /// finite-precision softmax outputs.
    pub epsilon: f64,
    /// Required by every command that draws random numbers.
    pub seed: Option<u64>,
    pub splits: usize,
    pub format: OutputFormat,
    pub unit: Unit,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            view: ViewSelection::All,
            epsilon: 0.0,
            seed: None,
            splits: crate::eval::SplitSpec::DEFAULT_COUNT,
            format: OutputFormat::Csv,
            unit: Unit::Nats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOptionError(String);

impl fmt::Display for ParseOptionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseOptionError {}

impl FromStr for ViewSelection {
    type Err = ParseOptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(ViewSelection::All),
            "mi" => Ok(ViewSelection::Only(View::MiBased)),
            "epkl" => Ok(ViewSelection::Only(View::EpklBased)),
            "rmi" => Ok(ViewSelection::Only(View::RmiView)),
            _ => Err(ParseOptionError(format!("unknown view {s:?}; expected all, mi, epkl or rmi"))),
        }
    }
}

impl FromStr for OutputFormat {
    type Err = ParseOptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(ParseOptionError(format!("unknown format {s:?}; expected csv or json"))),
        }
    }
}

impl FromStr for Unit {
    type Err = ParseOptionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nats" => Ok(Unit::Nats),
            "bits" => Ok(Unit::Bits),
            _ => Err(ParseOptionError(format!("unknown unit {s:?}; expected nats or bits"))),
        }
    }
}
