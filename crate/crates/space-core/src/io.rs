//! JSON interchange for sampled spaces.
//!
//! ```json
//! {"dim": 2, "points": [[0.1, 0.2], ...], "weights": [...],
//!  "bounds": {"lo": [0, 0], "hi": [1, 1]}, "metric": {"norm": "euclidean"},
//!  "spacing": 0.01}
//! ```
//! `weights` defaults to unit weights, `metric` to the Euclidean norm. When
//! `spacing` is given the resolution is taken from it instead of measured.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::metric::{Metric, NormMetric};
use crate::space::{Bounds, MetricMeasureSpace};
use crate::{Result, SpaceError};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<NormMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

impl SpaceFile {
    pub fn from_space(space: &MetricMeasureSpace) -> Result<Self> {
        let metric = space.metric().as_norm().ok_or_else(|| {
            SpaceError::InvalidParameter("custom metrics cannot be serialized".into())
        })?;
        Ok(Self {
            dim: space.dim(),
            points: space.coords().chunks(space.dim()).map(|c| c.to_vec()).collect(),
            weights: Some(space.weights().to_vec()),
            bounds: space.bounds().cloned(),
            metric: Some(metric),
            spacing: Some(space.resolution()),
        })
    }

    pub fn into_space(self) -> Result<MetricMeasureSpace> {
        let n = self.points.len();
        let mut coords = Vec::with_capacity(n * self.dim);
        for p in &self.points {
            if p.len() != self.dim {
                return Err(SpaceError::DimensionMismatch {
                    expected: self.dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        let weights = self.weights.unwrap_or_else(|| vec![1.0; n]);
        let metric = Metric::Norm(self.metric.unwrap_or_default());
        match self.spacing {
            Some(h) => {
                MetricMeasureSpace::with_spacing(self.dim, coords, weights, self.bounds, metric, h)
            }
            None => MetricMeasureSpace::new(self.dim, coords, weights, self.bounds, metric),
        }
    }
}

pub fn from_json_str(text: &str) -> Result<MetricMeasureSpace> {
    let file: SpaceFile =
        serde_json::from_str(text).map_err(|e| SpaceError::Parse(e.to_string()))?;
    file.into_space()
}

pub fn to_json_string(space: &MetricMeasureSpace) -> Result<String> {
    serde_json::to_string(&SpaceFile::from_space(space)?)
        .map_err(|e| SpaceError::Parse(e.to_string()))
}

pub fn load(path: impl AsRef<Path>) -> Result<MetricMeasureSpace> {
    from_json_str(&fs::read_to_string(path)?)
}

pub fn save(space: &MetricMeasureSpace, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_json_string(space)?)?;
    Ok(())
}
