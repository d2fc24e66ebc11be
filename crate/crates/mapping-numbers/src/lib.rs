//! Lipschitz and distortion numbers of a mapping sampled on a point cloud.
//!
//! `L_f(x, r)` is the largest image distance from `f(x)` over the closed
//! ball of radius `r`; `l_f(x, r)` the smallest over samples at distance at
//! least `r`. Their quotients by `r` and by each other, optionally reweighted
//! by an auxiliary measure `kappa`, are tracked along a decreasing radius
//! schedule; the max (min) over the tail of the schedule stands in for the
//! limsup (liminf).

mod error;
mod field;
mod mapping;
mod schedule;
mod weight;

pub use error::MappingError;
pub use field::{
    asymptotic_field, asymptotic_fields, discontinuity_scan, fmt_float, radial_profiles, FieldKind, FieldParams,
    JumpFlag, PointwiseField, RadialProfile, Selection, DIVERGENCE_EXPONENT,
};
pub use mapping::{ratio, MappingFile, SampledMapping};
pub use schedule::RadiusSchedule;
pub use weight::RadonWeight;

pub type Result<T> = std::result::Result<T, MappingError>;
