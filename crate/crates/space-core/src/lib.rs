//! Finite samples of metric measure spaces.
//!
//! A [`MetricMeasureSpace`] is a cloud of weighted points with a distance
//! oracle and a uniform-grid spatial index. Everything downstream (mapping
//! numbers, covers, curve densities, certificates) is phrased in terms of
//! point indices into one of these spaces.

mod error;
mod index;
pub mod io;
mod metric;
mod regularity;
mod space;

pub use error::SpaceError;
pub use index::GridIndex;
pub use metric::{DistanceOracle, Metric, Norm, NormMetric};
pub use regularity::{
    ahlfors_check, connectivity, doubling_constant_estimate, inner_region, AhlforsReport,
    ConnectivityReport, DoublingEstimate, InnerRegion, RadiusRatio,
};
pub use space::{Ball, Bounds, MetricMeasureSpace};

pub type Result<T> = std::result::Result<T, SpaceError>;
