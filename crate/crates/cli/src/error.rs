use legis_core::corpus::CorpusError;
use legis_core::graph::GraphError;
use legis_core::llm::LlmError;
use legis_core::monitor::MonitorError;
use legis_core::pipeline::PipelineError;
use legis_core::vector::VectorError;
use thiserror::Error;

/// Command failure, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or inputs the engine rejects; exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Files, snapshots, indexes or backends that cannot be read or reached; exit code 2.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::ManifestNotFound(_) | CorpusError::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::NodeNotFound(_) | GraphError::KindMismatch { .. } => CliError::Validation(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<VectorError> for CliError {
    fn from(e: VectorError) -> Self {
        match e {
            VectorError::Io { .. }
            | VectorError::CorruptIndex(_)
            | VectorError::VersionMismatch { .. }
            | VectorError::BackendUnavailable(_) => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::BackendUnavailable { .. } | LlmError::Timeout { .. } | LlmError::Io { .. } => {
                CliError::Io(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<MonitorError> for CliError {
    fn from(e: MonitorError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Llm(e) => e.into(),
            PipelineError::Vector(e) => e.into(),
            PipelineError::Corpus(e) => e.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}
