use std::path::PathBuf;

use kgprox_core::align::AlignError;
use kgprox_core::metrics::MetricError;
use kgprox_core::pipeline::{PipelineError, SynthError};
use thiserror::Error;

/// Everything a command can fail with. Each variant maps onto one exit
/// status, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed or schema-violating input.
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Input {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const DEGENERATE: u8 = 3;
    pub const EMPTY: u8 = 4;
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => exit::IO,
            Error::Input { .. } | Error::Usage(_) | Error::Align(_) | Error::Synth(_) => exit::INPUT,
            Error::Metric(e) => metric_code(e),
            Error::Pipeline(e) => match e {
                PipelineError::EmptyExperiment(_) | PipelineError::MissingPredicate(_) => exit::EMPTY,
                PipelineError::InvalidConfig(_) => exit::INPUT,
                PipelineError::Metric(m) => metric_code(m),
                PipelineError::SummaryMismatch(_) => exit::DEGENERATE,
            },
        }
    }
}

fn metric_code(e: &MetricError) -> u8 {
    match e {
        MetricError::DegenerateNull { .. } => exit::DEGENERATE,
        _ => exit::INPUT,
    }
}
