//! Polyline curves through sampled spaces and the p-modulus of finite
//! curve families.
//!
//! Densities live on sample points; a curve integral is the trapezoid rule
//! along the polyline. The modulus problem
//! `min sum mu_x rho_x^p` subject to `integral_gamma rho >= 1` is a linear
//! program for `p = 1` and is solved by exact dual coordinate ascent for
//! `p > 1`, which yields a duality gap as a convergence certificate.

mod checks;
mod curve;
mod modulus;

pub use checks::{am_upper_bound, upper_gradient_check, AmReport, CurveCheck, UpperGradientReport};
pub use curve::{gamma_a_family, Curve, CurveFamily};
pub use modulus::{p_modulus, p_modulus_with_threshold, ModulusReport, SolverBudget};

use space_core::SpaceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("curve needs at least two distinct vertices")]
    Degenerate,
    #[error("vertices {0} and {1} are {2} apart, more than twice the resolution")]
    Gap(usize, usize, f64),
    #[error("density has {found} values, space has {expected} points")]
    DensityLength { expected: usize, found: usize },
    #[error("negative density {value} at point {point}")]
    NegativeDensity { point: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty set of target points")]
    EmptySet,
    #[error("could not place a curve of length {0} through the set")]
    NoRoom(f64),
    #[error("linear program failed: {0}")]
    Solver(String),
    #[error("empty density sequence")]
    EmptySequence,
}

pub type Result<T> = std::result::Result<T, CurveError>;

/// Checks that a density has one nonnegative finite value per point.
pub fn check_density(space: &space_core::MetricMeasureSpace, rho: &[f64]) -> Result<()> {
    if rho.len() != space.len() {
        return Err(CurveError::DensityLength {
            expected: space.len(),
            found: rho.len(),
        });
    }
    if let Some(point) = rho.iter().position(|v| !(*v >= 0.0)) {
        return Err(CurveError::NegativeDensity {
            point,
            value: rho[point],
        });
    }
    Ok(())
}
