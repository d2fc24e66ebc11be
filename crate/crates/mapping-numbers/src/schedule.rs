use serde::{Deserialize, Serialize};

use crate::{MappingError, Result};

/// Decreasing radii standing in for `r -> 0`. The last `tail` radii feed the
/// limsup/liminf proxies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    radii: Vec<f64>,
    tail: usize,
}

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>, tail: usize) -> Result<Self> {
        if tail < 2 || radii.len() < tail {
            return Err(MappingError::Schedule(format!(
                "need at least {} radii and a tail of 2 or more, got {} and {tail}",
                tail.max(2),
                radii.len()
            )));
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(MappingError::Schedule("radii must be positive".into()));
        }
        if radii.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(MappingError::Schedule("radii must strictly decrease".into()));
        }
        Ok(Self { radii, tail })
    }

    /// `count` radii `largest, largest/ratio, ...`, all in the tail.
    pub fn geometric(largest: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(MappingError::Schedule(format!("ratio {ratio} must exceed 1")));
        }
        let radii = (0..count).map(|k| largest / ratio.powi(k as i32)).collect();
        Self::new(radii, count)
    }

    /// Same radii with a different tail length.
    pub fn with_tail(&self, tail: usize) -> Result<Self> {
        Self::new(self.radii.clone(), tail)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn tail_radii(&self) -> &[f64] {
        &self.radii[self.radii.len() - self.tail..]
    }

    pub fn largest(&self) -> f64 {
        self.radii[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn check_floor(&self, floor: f64) -> Result<()> {
        if self.smallest() < floor * (1.0 - 1e-9) {
            return Err(MappingError::Space(space_core::SpaceError::BelowTrustedFloor {
                radius: self.smallest(),
                floor,
            }));
        }
        Ok(())
    }
}
