use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("unknown point identifier {0}")]
    UnknownPoint(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("radius {radius} is below the trusted floor {floor}")]
    BelowTrustedFloor { radius: f64, floor: f64 },
    #[error("radius schedule is empty")]
    EmptySchedule,
    #[error("weight at point {index} is negative or not finite ({value})")]
    BadWeight { index: usize, value: f64 },
    #[error("total weight must be positive")]
    ZeroTotalWeight,
    #[error("expected coordinates of dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("space has no points")]
    Empty,
    #[error("no region descriptor is attached to this space")]
    NoRegion,
    #[error("ball around point {point} with radius {radius} has zero mass")]
    DegenerateBall { point: usize, radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}
