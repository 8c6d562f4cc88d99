use std::path::PathBuf;

use qsarnet::bench::BenchError;
use qsarnet::dataprep::DataError;
use qsarnet::metrics::MetricError;
use qsarnet::netcore::NetError;
use qsarnet::trainers::TrainError;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) | CliError::Write { .. } | CliError::Read { .. } => EXIT_DATA,
            CliError::Diverged(_) => EXIT_DIVERGED,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::InvalidPlan(_) | DataError::InvalidSpec(_) | DataError::TrainCountOutOfRange { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::Malformed(_) | NetError::DimensionMismatch { .. } => CliError::Data(e.to_string()),
            NetError::InvalidInit(_) | NetError::UnsupportedDepth(_) | NetError::EmptyLayer => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged { .. } => CliError::Diverged(e.to_string()),
            TrainError::InvalidConfig(_) => CliError::Usage(e.to_string()),
            TrainError::Data(d) => d.into(),
            TrainError::Net(n) => n.into(),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::AllRunsFailed { .. } => CliError::Diverged(e.to_string()),
            BenchError::InvalidArgument(_) | BenchError::UnknownModel(_) => CliError::Usage(e.to_string()),
            BenchError::Data(d) => d.into(),
            BenchError::Net(n) => n.into(),
            BenchError::Train(t) => t.into(),
            BenchError::Malformed(_) | BenchError::InsufficientRuns { .. } | BenchError::ColumnFailed { .. } => {
                CliError::Data(e.to_string())
            }
            BenchError::Quadrature(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}
