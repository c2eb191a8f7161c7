use std::process::ExitCode;

use cvsep_core::Error as CoreError;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("reentrant phase at {} grid point(s): {}", .0.len(), render_points(.0))]
    Reentrant(Vec<(f64, String)>),
    #[error("{0} reference cell(s) outside tolerance")]
    Mismatch(usize),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn render_points(points: &[(f64, String)]) -> String {
    points
        .iter()
        .map(|(tau, labels)| format!("tau={tau:.2} [{labels}]"))
        .collect::<Vec<_>>()
        .join("; ")
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Reentrant(_) => 4,
            CliError::Mismatch(_) => 1,
            CliError::Io { .. } => 1,
        })
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(m) | CoreError::Domain(m) => CliError::Schema(m),
            CoreError::NumericalFailure(m) => CliError::Numerical(m),
            CoreError::ReentrantPhase { offending } => CliError::Reentrant(offending),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
