// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use assetscan_core::config::ConfigError;
use assetscan_core::design::DesignError;
use assetscan_core::pipeline::PipelineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no RTL files (.v, .sv, .vh, .svh) found under {}", .0.display())]
    NoRtlFiles(PathBuf),
    #[error("RTL directory {} does not exist", .0.display())]
    MissingRtlDir(PathBuf),
    #[error("no module definitions found in the RTL under {}", .0.display())]
    NoModules(PathBuf),
    #[error("top module `{name}` not found; available modules: {}", available.join(", "))]
    UnknownTop { name: String, available: Vec<String> },
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("configuration file {}: {message}", path.display())]
    ConfigFile { path: PathBuf, message: String },
    #[error("ground truth {}:{line}: {message}", path.display())]
    GroundTruth { path: PathBuf, line: u64, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Design(DesignError),
    #[error("report serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoRtlFiles(_) | Error::MissingRtlDir(_) | Error::NoModules(_) => 2,
            Error::UnknownTop { .. } => 3,
            Error::Config(_) | Error::ConfigFile { .. } => 4,
            _ => 1,
        }
    }
}

impl From<DesignError> for Error {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::UnknownTop { name, available } => Error::UnknownTop { name, available },
            other => Error::Design(other),
        }
    }
}

impl From<PipelineError> for Error {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Design(d) => d.into(),
            PipelineError::Config(c) => Error::Config(c),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
