use mapping_numbers::SampledMapping;
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::curve::CurveFamily;
use crate::{check_density, CurveError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveCheck {
    pub endpoint_distance: f64,
    pub integral: f64,
    /// `integral - endpoint_distance`
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UpperGradientReport {
    pub curves: Vec<CurveCheck>,
    pub pass_fraction: f64,
}

impl UpperGradientReport {
    pub fn failing(&self) -> Vec<usize> {
        self.curves
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.pass)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Endpoint inequality `d(f(start), f(end)) <= integral_gamma g` per curve,
/// with relative slack `tol`.
pub fn upper_gradient_check(
    mapping: &SampledMapping,
    density: &[f64],
    family: &CurveFamily,
    tol: f64,
) -> Result<UpperGradientReport> {
    check_density(mapping.domain(), density)?;
    let curves: Vec<CurveCheck> = family
        .curves
        .iter()
        .map(|c| {
            let endpoint_distance = mapping.image_distance(c.start(), c.end());
            let integral = c.integral(density);
            let margin = integral - endpoint_distance;
            CurveCheck {
                endpoint_distance,
                integral,
                margin,
                pass: margin >= -tol * endpoint_distance.max(f64::MIN_POSITIVE),
            }
        })
        .collect();
    let passed = curves.iter().filter(|c| c.pass).count();
    let pass_fraction = if curves.is_empty() {
        1.0
    } else {
        passed as f64 / curves.len() as f64
    };
    Ok(UpperGradientReport {
        curves,
        pass_fraction,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmReport {
    /// per curve: min over the tail of `integral_gamma rho_i`
    pub tail_min: Vec<f64>,
    pub admissible: Vec<bool>,
    pub all_admissible: bool,
    /// min over the tail of `sum mu rho_i`, the liminf proxy
    pub value: f64,
    pub energies: Vec<f64>,
}

/// AM upper bound from a finite density sequence: the last `tail` terms
/// stand in for the liminf, both in admissibility and in the energy.
pub fn am_upper_bound(
    space: &MetricMeasureSpace,
    family: &CurveFamily,
    densities: &[Vec<f64>],
    tail: usize,
    tol: f64,
) -> Result<AmReport> {
    if densities.is_empty() {
        return Err(CurveError::EmptySequence);
    }
    for d in densities {
        check_density(space, d)?;
    }
    let tail = tail.clamp(1, densities.len());
    let tail_seq = &densities[densities.len() - tail..];
    let tail_min: Vec<f64> = family
        .curves
        .iter()
        .map(|c| {
            tail_seq
                .iter()
                .map(|d| c.integral(d))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let admissible: Vec<bool> = tail_min.iter().map(|&v| v >= 1.0 - tol).collect();
    let energies: Vec<f64> = densities
        .iter()
        .map(|d| d.iter().zip(space.weights()).map(|(r, w)| r * w).sum())
        .collect();
    let value = energies[energies.len() - tail..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(AmReport {
        all_admissible: admissible.iter().all(|&a| a),
        tail_min,
        admissible,
        value,
        energies,
    })
}
