use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A distance on coordinate vectors.
///
/// `box_radius(r)` must return a half-width `w` such that every `y` with
/// `distance(x, y) <= r` satisfies `|x_i - y_i| <= w` on every axis. The
/// spatial index relies on it to enumerate candidates.
pub trait DistanceOracle: Send + Sync + fmt::Debug {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;
    fn box_radius(&self, r: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    Euclidean,
    Chebyshev,
    Manhattan,
}

/// `scale * ||a - b||` for one of the standard norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormMetric {
    pub norm: Norm,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for NormMetric {
    fn default() -> Self {
        Self {
            norm: Norm::Euclidean,
            scale: 1.0,
        }
    }
}

impl NormMetric {
    pub fn euclidean() -> Self {
        Self::default()
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            norm: self.norm,
            scale: self.scale * factor,
        }
    }
}

impl DistanceOracle for NormMetric {
    #[inline]
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let raw = match self.norm {
            Norm::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Norm::Chebyshev => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            Norm::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        };
        self.scale * raw
    }

    fn box_radius(&self, r: f64) -> f64 {
        r / self.scale
    }
}

/// Either a serializable norm metric or a user supplied oracle.
#[derive(Clone, Debug)]
pub enum Metric {
    Norm(NormMetric),
    Custom(Arc<dyn DistanceOracle>),
}

impl Default for Metric {
    fn default() -> Self {
        Metric::Norm(NormMetric::default())
    }
}

impl Metric {
    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Norm(m) => m.distance(a, b),
            Metric::Custom(m) => m.distance(a, b),
        }
    }

    #[inline]
    pub fn box_radius(&self, r: f64) -> f64 {
        match self {
            Metric::Norm(m) => m.box_radius(r),
            Metric::Custom(m) => m.box_radius(r),
        }
    }

    /// Distance from a point inside an axis box to the box complement.
    ///
    /// Exact for the norm metrics (unit axis vectors have norm one); custom
    /// oracles fall back to measuring the axis projections with the oracle.
    pub fn distance_to_box_complement(&self, x: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
        let axis_gap = x
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&v, (&l, &h))| (v - l).min(h - v))
            .fold(f64::INFINITY, f64::min);
        if axis_gap <= 0.0 {
            return 0.0;
        }
        match self {
            Metric::Norm(m) => m.scale * axis_gap,
            Metric::Custom(m) => {
                let mut best = f64::INFINITY;
                let mut probe = x.to_vec();
                for axis in 0..x.len() {
                    for edge in [lo[axis], hi[axis]] {
                        probe[axis] = edge;
                        best = best.min(m.distance(x, &probe));
                        probe[axis] = x[axis];
                    }
                }
                best
            }
        }
    }

    /// The multiplicative factor if this is a norm metric.
    pub fn scale(&self) -> Option<f64> {
        match self {
            Metric::Norm(m) => Some(m.scale),
            Metric::Custom(_) => None,
        }
    }

    pub fn as_norm(&self) -> Option<NormMetric> {
        match self {
            Metric::Norm(m) => Some(*m),
            Metric::Custom(_) => None,
        }
    }
}
