//! Error taxonomy mapped onto process exit codes.

use thiserror::Error;

use nnk_core::dataset::DatasetError;
use nnk_core::geometry::GeometryError;
use nnk_core::graph::BuildError;
use nnk_core::neighbors::NeighborsError;
use nnk_core::spectral::SpectralError;

/// Exit codes: 1 configuration, 2 data, 3 solver.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<NeighborsError> for CliError {
    fn from(e: NeighborsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            // a K out of range for the dataset is a data problem, not
            // a numeric failure
            BuildError::Neighbors(inner) => CliError::Data(inner.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NoLabels | SpectralError::InvalidInput(_) => {
                CliError::Data(e.to_string())
            }
            SpectralError::SolveFailed(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
