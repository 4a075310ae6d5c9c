use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid interferometer: {0}")]
    Validation(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("schedule error: {0}")]
    Schedule(String),
    #[error("photon number {found} exceeds truncation {limit}")]
    Truncation { found: usize, limit: usize },
    #[error("calibration error: {0}")]
    Calibration(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("missing tomography setting {0}")]
    MissingSetting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
