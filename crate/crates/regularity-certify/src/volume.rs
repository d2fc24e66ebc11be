use mapping_numbers::SampledMapping;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{num, CertifyError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageVolume {
    pub beta: f64,
    /// target measure of the union of the image balls
    #[serde(with = "num")]
    pub volume: f64,
    pub balls: usize,
    /// target samples inside the union
    pub marked: usize,
}

/// Target measure of `V = union of B(f(y), l_f(y, beta))` over `points`,
/// as the total weight of the target samples inside some open image ball.
pub fn image_volume(mapping: &SampledMapping, points: &[usize], beta: f64) -> Result<ImageVolume> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(CertifyError::InvalidParameter(format!("beta = {beta}")));
    }
    let radii: Vec<f64> = points
        .par_iter()
        .map(|&y| mapping.lower(y, beta))
        .collect::<std::result::Result<_, _>>()?;
    let target = mapping.target();
    let n = target.len();
    let marked = points
        .par_iter()
        .zip(&radii)
        .fold(
            || vec![false; n],
            |mut acc, (&y, &l)| {
                if l.is_infinite() {
                    acc.iter_mut().for_each(|m| *m = true);
                } else if l > 0.0 {
                    target.for_each_within(mapping.value(y), l, false, |z, _| acc[z] = true);
                }
                acc
            },
        )
        .reduce(
            || vec![false; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                a
            },
        );
    let w = target.weights();
    let volume = marked
        .iter()
        .zip(w)
        .filter(|(m, _)| **m)
        .map(|(_, w)| w)
        .sum();
    Ok(ImageVolume {
        beta,
        volume,
        balls: points.len(),
        marked: marked.iter().filter(|&&m| m).count(),
    })
}

/// `nu(B(f(y), l_f(y, r))) / mu(B(y, r))` at every point.
pub fn ball_volume_ratio(mapping: &SampledMapping, points: &[usize], r: f64) -> Result<Vec<f64>> {
    let domain = mapping.domain();
    let target = mapping.target();
    points
        .par_iter()
        .map(|&y| {
            let l = mapping.lower(y, r)?;
            let image = if l.is_finite() {
                target.mass_within(mapping.value(y), l, false, target.weights())
            } else {
                target.total_weight()
            };
            let base = domain.mass_within(domain.point(y), r, false, domain.weights());
            Ok(image / base)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use space_core::MetricMeasureSpace;
    use std::sync::Arc;

    #[test]
    fn constant_map_has_empty_image() {
        let d = Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.05).unwrap());
        let m = SampledMapping::from_fn(d.clone(), d.clone(), false, |_| vec![0.5, 0.5]).unwrap();
        let all: Vec<usize> = (0..d.len()).collect();
        let v = image_volume(&m, &all, 0.1).unwrap();
        assert_eq!(v.volume, 0.0);
        assert!(image_volume(&m, &all, 0.0).is_err());
    }

    #[test]
    fn identity_ratio_is_one_inside() {
        let d = Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.02).unwrap());
        let m = SampledMapping::from_fn(d.clone(), d.clone(), true, |x| x.to_vec()).unwrap();
        let x = d.nearest(&[0.5, 0.5]).unwrap().0;
        let h = ball_volume_ratio(&m, &[x], 0.1).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-12, "{}", h[0]);
    }
}
