use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::{MappingError, Result};

/// An auxiliary measure on the sample points: `density * mu` plus point
/// masses attached to sample indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RadonWeight {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub singular: Vec<(usize, f64)>,
}

impl RadonWeight {
    /// The base measure itself.
    pub fn base() -> Self {
        Self::default()
    }

    pub fn with_density(density: Vec<f64>) -> Self {
        Self {
            density: Some(density),
            singular: Vec::new(),
        }
    }

    pub fn add_mass(&mut self, point: usize, mass: f64) {
        self.singular.push((point, mass));
    }

    /// Attaches `mass` to the sample nearest to `location`.
    pub fn add_mass_at(&mut self, space: &MetricMeasureSpace, location: &[f64], mass: f64) {
        if let Some((j, _)) = space.nearest(location) {
            self.add_mass(j, mass);
        }
    }

    /// Per-point masses of this measure on `space`.
    pub fn masses(&self, space: &MetricMeasureSpace) -> Result<Vec<f64>> {
        let n = space.len();
        let mut out: Vec<f64> = match &self.density {
            Some(d) => {
                if d.len() != n {
                    return Err(MappingError::WeightMismatch {
                        expected: n,
                        found: d.len(),
                    });
                }
                if let Some(i) = d.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(MappingError::InvalidParameter(format!(
                        "density at point {i} is {}",
                        d[i]
                    )));
                }
                d.iter().zip(space.weights()).map(|(a, w)| a * w).collect()
            }
            None => space.weights().to_vec(),
        };
        for &(i, m) in &self.singular {
            space.check_point(i)?;
            if !(m >= 0.0) || !m.is_finite() {
                return Err(MappingError::InvalidParameter(format!("point mass {m}")));
            }
            out[i] += m;
        }
        Ok(out)
    }

    /// True when the density is at least one everywhere, which makes the
    /// measure dominate the base measure on every ball.
    pub fn dominates_base(&self) -> bool {
        self.density
            .as_ref()
            .map_or(true, |d| d.iter().all(|&a| a >= 1.0))
    }
}
