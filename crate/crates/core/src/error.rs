//! Error type shared by every module, with the process exit-code mapping.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit statuses reported by the tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    CommandLine = 1,
    SystemExecution = 2,
    NotFound = 3,
    ParameterSyntax = 4,
    Open = 5,
    Close = 6,
    NoJob = 7,
    Computation = 8,
    InternalParse = 9,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    CommandLine(String),

    #[error("system execution error: {0}")]
    Execution(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("requirement not matched: {0}")]
    Requirement(String),

    #[error("parameter file syntax error at line {line}: {message}")]
    ParameterSyntax { line: usize, message: String },

    #[error("error opening {}: {source}", path.display())]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("error closing {}: {source}", path.display())]
    Close {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("no job found coming from template in the list")]
    NoJob,

    #[error("internal computation error: {0}")]
    Computation(String),

    #[error("internal parsing error in {}: line {line}: {message}", path.display())]
    InternalParse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub fn syntax(line: usize, message: impl Into<String>) -> Self {
        Error::ParameterSyntax {
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::CommandLine(_) => ExitCode::CommandLine,
            Error::Execution(_) => ExitCode::SystemExecution,
            Error::FileNotFound(_) | Error::Requirement(_) => ExitCode::NotFound,
            Error::ParameterSyntax { .. } => ExitCode::ParameterSyntax,
            Error::Open { .. } => ExitCode::Open,
            Error::Close { .. } => ExitCode::Close,
            Error::NoJob => ExitCode::NoJob,
            Error::Computation(_) => ExitCode::Computation,
            Error::InternalParse { .. } => ExitCode::InternalParse,
        }
    }
}

/// Reads a whole text file, distinguishing a missing file from one that
/// exists but cannot be read.
pub fn read_text(path: &std::path::Path) -> Result<String> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::FileNotFound(path.to_path_buf()))
        }
        Err(source) => Err(Error::Open {
            path: path.to_path_buf(),
            source,
        }),
    }
}
