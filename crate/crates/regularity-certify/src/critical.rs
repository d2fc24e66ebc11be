use mapping_numbers::{asymptotic_fields, FieldKind, FieldParams, SampledMapping, Selection};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::partition::Partition;
use crate::volume::ball_volume_ratio;
use crate::{num, CertifyError, Result};

/// Integral of the ball-volume estimator at one level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorLevel {
    pub level: usize,
    #[serde(with = "num")]
    pub integral: f64,
}

/// The `p = Q` branch: `Q`-energy of the pointwise Lipschitz number against
/// `C_4 nu(V) |a|^(Q-1) |H^(a,M)|^Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub q: f64,
    /// integral of `lip^Q` over the evaluated points
    #[serde(with = "num")]
    pub lip_energy: f64,
    #[serde(with = "num")]
    pub lip_max: f64,
    #[serde(with = "num")]
    pub a_sup: f64,
    /// sampled sup of the weighted distortion
    #[serde(with = "num")]
    pub distortion_sup: f64,
    /// sampled sup of the plain distortion
    #[serde(with = "num")]
    pub plain_distortion_sup: f64,
    /// `a_sup^((Q-1)/Q) * distortion_sup`
    #[serde(with = "num")]
    pub comparison_bound: f64,
    pub comparison_holds: bool,
    pub image_volume: f64,
    pub constant: f64,
    #[serde(with = "num")]
    pub bound: f64,
    pub estimator: Vec<EstimatorLevel>,
    #[serde(with = "num")]
    pub estimator_min: f64,
    /// `C_Omega^2 |H|^Q min_j integral(h_j)`
    #[serde(with = "num")]
    pub estimator_bound: f64,
    pub pass: bool,
}

/// Evaluates the critical branch on the evaluated points of `partition`,
/// which must carry the weighted distortion field.
pub fn critical_branch(
    mapping: &SampledMapping,
    partition: &Partition,
    params: &FieldParams,
    constants: &Constants,
    image_volume: f64,
) -> Result<CriticalReport> {
    let weighted = partition
        .distortion
        .as_ref()
        .ok_or(CertifyError::NotInjective("the critical branch"))?;
    let domain = mapping.domain();
    let a_sup = match params.weight.as_ref().and_then(|w| w.density.as_ref()) {
        Some(d) => d.iter().cloned().fold(0.0, f64::max),
        None => 1.0,
    };
    if !a_sup.is_finite() {
        return Err(CertifyError::UnboundedWeight);
    }
    let q = constants.q;
    let points = partition.points.clone();
    let (lip_energy, lip_max, plain_sup) = if points.is_empty() {
        (0.0, 0.0, 0.0)
    } else {
        let fields = asymptotic_fields(
            mapping,
            &[FieldKind::LipLower, FieldKind::DistortionUpper],
            &partition.schedule,
            &FieldParams::default(),
            &Selection::Points(points.clone()),
        )?;
        let mu = domain.weights();
        let energy: f64 = fields[0]
            .values
            .iter()
            .zip(&points)
            .map(|(v, &i)| v.powf(q) * mu[i])
            .sum();
        (energy, fields[0].max_value(), fields[1].max_value())
    };
    let distortion_sup = weighted.max_value();
    let comparison_bound = a_sup.powf((q - 1.0) / q) * distortion_sup;
    let constant = constants.critical();
    let bound = constant * image_volume * a_sup.powf(q - 1.0) * distortion_sup.powf(q);
    let mu = domain.weights();
    let mut estimator = Vec::with_capacity(partition.levels.len());
    for &j in &partition.levels {
        let h = ball_volume_ratio(mapping, &points, 1.0 / j as f64)?;
        let integral = h.iter().zip(&points).map(|(v, &i)| v * mu[i]).sum();
        estimator.push(EstimatorLevel { level: j, integral });
    }
    let estimator_min = estimator
        .iter()
        .map(|e| e.integral)
        .fold(f64::INFINITY, f64::min);
    let estimator_bound = constants.regularity.powi(2) * plain_sup.powf(q) * estimator_min;
    let comparison_holds = plain_sup <= comparison_bound;
    Ok(CriticalReport {
        q,
        lip_energy,
        lip_max,
        a_sup,
        distortion_sup,
        plain_distortion_sup: plain_sup,
        comparison_bound,
        comparison_holds,
        image_volume,
        constant,
        bound,
        estimator,
        estimator_min,
        estimator_bound,
        pass: comparison_holds && distortion_sup.is_finite() && lip_energy <= bound,
    })
}
