use thiserror::Error;

/// Errors raised by module, layer and dataset operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroVector,
    #[error("vector contains a non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("vector must have at least one entry")]
    EmptyVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension mismatch at stage {stage}: expected {expected}, found {found}")]
    StageDimensionMismatch {
        stage: usize,
        expected: usize,
        found: usize,
    },
    #[error("queried module holds no templates")]
    EmptyModule,
    #[error("signature is empty")]
    EmptySignature,
    #[error("layer has no modules")]
    EmptyLayer,
    #[error("architecture has no layers")]
    EmptyArchitecture,
    #[error("module {0} does not exist")]
    UnknownModule(usize),
    #[error("raw templates were not retained; exact insertion is unavailable")]
    RawUnavailable,
    #[error("training stream is empty")]
    EmptyStream,
    #[error("distortion must lie in (0, 1), got {0}")]
    InvalidEps(f64),
    #[error("projection already spans all {0} dimensions")]
    DimensionExhausted(usize),
    #[error("no episodes have been studied")]
    NotStudied,
    #[error("threshold calibration needs both same and different pairs")]
    DegenerateLabels,
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams {
        name: &'static str,
        reason: &'static str,
    },
    #[error("operation not supported by the {0} backend")]
    Unsupported(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Error {
    Error::InvalidParams { name, reason }
}
