use std::path::Path;

use sgbpe::codec::CodecError;
use sgbpe::corpus::CorpusError;
use sgbpe::model::ModelError;
use sgbpe::sweep::SweepError;
use sgbpe::trainer::TrainError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Config(_) => 4,
            CliError::Internal(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }

    /// Render as one line: `sgbpe: error[kind]: message`.
    pub fn line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("sgbpe: error[{}]: {}", self.kind(), msg.trim())
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InsufficientText { .. } => CliError::Config(e.to_string()),
            CorpusError::Decode { .. } | CorpusError::Io { .. } => CliError::Io(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Model(_) => CliError::Internal(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(_) | SweepError::MissingMode(_) => CliError::Config(e.to_string()),
            SweepError::Train { ref source, .. } => match source {
                TrainError::Model(_) => CliError::Internal(e.to_string()),
                _ => CliError::Config(e.to_string()),
            },
            SweepError::Eval { .. } => CliError::Internal(e.to_string()),
            SweepError::Io { .. } | SweepError::Csv { .. } => CliError::Io(e.to_string()),
        }
    }
}
