//! File formats, trace replay, synthetic scenarios and offline oracles for
//! the `meiga-core` signal chain.

use std::io;
use std::path::PathBuf;

use meiga_core::PipelineError;

pub mod config_file;
pub mod eventlog;
pub mod oracle;
pub mod replay;
pub mod scenario;
pub mod selftest;
pub mod summary;
pub mod trace;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{source_name}:{line}: {msg}")]
    Format {
        source_name: String,
        line: u64,
        msg: String,
    },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Pipeline(PipelineError),
    #[error("scenario: {0}")]
    Scenario(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(source_name: &str, line: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.to_owned(),
            line,
            msg: msg.into(),
        }
    }

    /// Process exit status: 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}

impl From<PipelineError> for Error {
    fn from(e: PipelineError) -> Self {
        Error::Pipeline(e)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
