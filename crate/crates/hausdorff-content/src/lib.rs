//! Ball-cover estimates of Hausdorff-type contents of sampled sets.
//!
//! Two covering sums are supported: the codimension form
//! `sum mu(B(x_k, r_k)) / r_k^p` and the dimension form `sum (2 r_k)^s`,
//! each over finite covers by balls of radius at most a cap `R`. Estimates
//! are upper bounds witnessed by the returned cover.

mod cover;
mod density;
mod search;

pub use cover::{Cover, CoverBall, CoverForm};
pub use density::{admissible_density, nested_covers, CoverLevel};
pub use search::{codim_content, content, dim_content, ContentEstimate};

use space_core::SpaceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContentError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("cap {cap} is below the space resolution {resolution}")]
    CapBelowResolution { cap: f64, resolution: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("level {level}: ball radius {radius} exceeds the level cap {cap}")]
    NotNested { level: usize, radius: f64, cap: f64 },
    #[error("level {level}: cost {cost} is not below the budget {budget}")]
    OverBudget { level: usize, cost: f64, budget: f64 },
    #[error("no level fits its budget above the resolution floor")]
    BudgetUnreachable,
}

pub type Result<T> = std::result::Result<T, ContentError>;
