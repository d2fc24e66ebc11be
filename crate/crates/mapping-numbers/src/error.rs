use space_core::SpaceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MappingError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("mapping has {found} values, domain has {expected} points")]
    LengthMismatch { expected: usize, found: usize },
    #[error("points {0} and {1} map within half the target resolution")]
    NotInjective(usize, usize),
    #[error("invalid radius schedule: {0}")]
    Schedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field kind {0} needs a weight measure")]
    MissingWeight(&'static str),
    #[error("weight has {found} entries, space has {expected} points")]
    WeightMismatch { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
