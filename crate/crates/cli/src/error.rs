use std::process::ExitCode;

use stdsa_core::ingest::IngestError;
use stdsa_core::pipeline::{PipelineError, StageError};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Kind::Usage => 1,
            Kind::Data => 2,
            Kind::Internal => 3,
        })
    }
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Data,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Internal,
            message: message.into(),
        }
    }

    /// Failure while reading input data.
    pub fn load(e: IngestError) -> Self {
        Self::data(format!("stage ingest: {e}"))
    }

    /// Failure while writing output files.
    pub fn write(e: impl std::fmt::Display) -> Self {
        Self::internal(format!("writing output: {e}"))
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let kind = match &e.source {
            StageError::Registry(_) => Kind::Usage,
            _ if e.is_data_error() => Kind::Data,
            _ => Kind::Internal,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}
