//! Constructive regularity certificates: partitions of the domain into
//! Lipschitz-controlled, distortion-controlled and exceptional points,
//! bounded-overlap covers, gradient sequences and their energy bounds.

mod certificate;
mod chain;
mod constants;
mod cover;
mod critical;
mod gradient;
pub mod num;
mod nullset;
mod partition;
mod probe;
mod volume;

pub use certificate::{
    certify, input_digest, Bound, Certificate, CertifyConfig, ConstantsRecord, CoverSummary,
    CurveSummary, EnergyRow, LevelCount, PartitionSummary, SweepPoint, Verdict,
};
pub use chain::{
    bv_chain, distortion_chain, lip_chain, ChainContext, Link, ARITHMETIC_TOLERANCE,
};
pub use constants::{sobolev_conjugate, Constants};
pub use cover::{build_cover, CoverLevel};
pub use critical::{critical_branch, CriticalReport};
pub use gradient::{assemble_gradients, BallTerm, Budgets, GradientLevel, GradientSequence};
pub use nullset::{
    modulus_vanishing, null_set_check, ModulusVanishing, NullSetReport, ADMISSIBLE_FLOOR,
};
pub use partition::{
    classify_points, level_schedule, ClassifyParams, HField, Part, Partition, Theorem,
};
pub use probe::{
    curvewise_verification, equi_integrability_probe, CurveOutcome, CurvewiseReport, EquiReport,
    LEVEL_GROWTH_LIMIT,
};
pub use volume::{ball_volume_ratio, image_volume, ImageVolume};

use curves_modulus::CurveError;
use hausdorff_content::ContentError;
use mapping_numbers::MappingError;
use space_core::SpaceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} needs an injective mapping")]
    NotInjective(&'static str),
    #[error("point {point} of the level-{level} set lies outside the inner region")]
    OutsideInnerRegion { level: usize, point: usize },
    #[error("no cover at level {0}")]
    MissingLevel(usize),
    #[error("the weight has no mass on the ball of radius {radius} around point {point}")]
    ZeroWeightBall { point: usize, radius: f64 },
    #[error("the weight density is unbounded on the samples")]
    UnboundedWeight,
    #[error("h has {found} values, the domain has {expected} points")]
    HLength { expected: usize, found: usize },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CertifyError>;
