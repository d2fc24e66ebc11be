use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use space_core::{GridIndex, MetricMeasureSpace};

use crate::{MappingError, Result};

/// Values `f(x)` in the target space for every domain sample.
#[derive(Clone, Debug)]
pub struct SampledMapping {
    domain: Arc<MetricMeasureSpace>,
    target: Arc<MetricMeasureSpace>,
    values: Vec<f64>,
    injective: bool,
    image_index: GridIndex,
    image_lo: Vec<f64>,
    image_hi: Vec<f64>,
}

impl SampledMapping {
    /// `values` holds `target.dim()` coordinates per domain point. A declared
    /// injective mapping is verified: two samples whose images are closer than
    /// half the target resolution are rejected.
    pub fn new(
        domain: Arc<MetricMeasureSpace>,
        target: Arc<MetricMeasureSpace>,
        values: Vec<f64>,
        injective: bool,
    ) -> Result<Self> {
        let td = target.dim();
        if values.len() != domain.len() * td {
            return Err(MappingError::LengthMismatch {
                expected: domain.len(),
                found: values.len() / td,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MappingError::Parse(format!(
                "non-finite value at point {}",
                i / td
            )));
        }
        let mut lo = vec![f64::INFINITY; td];
        let mut hi = vec![f64::NEG_INFINITY; td];
        for p in values.chunks_exact(td) {
            for k in 0..td {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let hint = target.metric().box_radius(domain.resolution().min(target.resolution()));
        let cell = GridIndex::suggested_cell(&values, td, hint);
        let image_index = GridIndex::build(&values, td, cell);
        let m = Self {
            domain,
            target,
            values,
            injective,
            image_index,
            image_lo: lo,
            image_hi: hi,
        };
        if injective {
            if let Some((i, j)) = m.near_collision(m.target.resolution() / 2.0) {
                return Err(MappingError::NotInjective(i, j));
            }
        }
        Ok(m)
    }

    /// Builds the values from a formula evaluated at every domain point.
    pub fn from_fn(
        domain: Arc<MetricMeasureSpace>,
        target: Arc<MetricMeasureSpace>,
        injective: bool,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(domain.len() * target.dim());
        for i in 0..domain.len() {
            let v = f(domain.point(i));
            if v.len() != target.dim() {
                return Err(MappingError::InvalidParameter(format!(
                    "formula returned {} coordinates, target has {}",
                    v.len(),
                    target.dim()
                )));
            }
            values.extend(v);
        }
        Self::new(domain, target, values, injective)
    }

    /// First pair of distinct samples whose images are closer than `tol`.
    /// Exhaustive: every pair within `tol` is a candidate in the image index.
    pub fn near_collision(&self, tol: f64) -> Option<(usize, usize)> {
        if !(tol > 0.0) || !tol.is_finite() {
            // tolerance zero: exact duplicates only
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            for i in 0..self.domain.len() {
                let key: Vec<u64> = self.value(i).iter().map(|v| v.to_bits()).collect();
                if let Some(&j) = seen.get(&key) {
                    return Some((j, i));
                }
                seen.insert(key, i);
            }
            return None;
        }
        let metric = self.target.metric();
        let half = metric.box_radius(tol);
        for i in 0..self.domain.len() {
            let fi = self.value(i);
            let mut hit = None;
            self.image_index.for_each_candidate(fi, half, |j| {
                if hit.is_none() && j != i && metric.distance(fi, self.value(j)) < tol {
                    hit = Some(j);
                }
            });
            if let Some(j) = hit {
                return Some((i.min(j), i.max(j)));
            }
        }
        None
    }

    pub fn domain(&self) -> &MetricMeasureSpace {
        &self.domain
    }

    pub fn domain_arc(&self) -> &Arc<MetricMeasureSpace> {
        &self.domain
    }

    pub fn target(&self) -> &MetricMeasureSpace {
        &self.target
    }

    pub fn target_arc(&self) -> &Arc<MetricMeasureSpace> {
        &self.target
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_injective(&self) -> bool {
        self.injective
    }

    #[inline]
    pub fn value(&self, i: usize) -> &[f64] {
        let d = self.target.dim();
        &self.values[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn image_distance(&self, i: usize, j: usize) -> f64 {
        self.target.metric().distance(self.value(i), self.value(j))
    }

    /// `sup { d(f(y), f(x)) : d(y, x) <= r }` over the samples.
    pub fn upper(&self, x: usize, r: f64) -> Result<f64> {
        self.domain.check_point(x)?;
        let mut best = 0.0f64;
        self.domain
            .for_each_within(self.domain.point(x), r, true, |j, _| {
                best = best.max(self.image_distance(x, j));
            });
        Ok(best)
    }

    /// `inf { d(f(y), f(x)) : d(y, x) >= r }` over the samples; infinite when
    /// no sample lies that far from `x`.
    pub fn lower(&self, x: usize, r: f64) -> Result<f64> {
        self.domain.check_point(x)?;
        let hint = self.upper(x, r + 2.0 * self.domain.resolution().min(r.max(1e-300)))?;
        Ok(self.lower_from(x, r, hint))
    }

    /// Exact `l_f(x, r)` by an expanding search in the image, starting from
    /// an image radius `hint` (any value works; a good upper bound is fast).
    pub(crate) fn lower_from(&self, x: usize, r: f64, hint: f64) -> f64 {
        let metric = self.target.metric();
        let fx = self.value(x);
        let px = self.domain.point(x);
        let reach = fx
            .iter()
            .zip(self.image_lo.iter().zip(&self.image_hi))
            .map(|(&v, (&l, &h))| (v - l).max(h - v))
            .fold(0.0f64, f64::max);
        let mut rho = if hint.is_finite() && hint > 0.0 {
            hint
        } else {
            metric.box_radius(1.0).recip() * self.image_index.cell()
        };
        if hint == 0.0 {
            // only an exact collision can beat the hint
            let mut zero = false;
            self.image_index.for_each_candidate(fx, 0.0, |j| {
                if !zero
                    && metric.distance(fx, self.value(j)) == 0.0
                    && self.domain.metric().distance(px, self.domain.point(j)) >= r
                {
                    zero = true;
                }
            });
            if zero {
                return 0.0;
            }
        }
        loop {
            let half = metric.box_radius(rho) * (1.0 + 1e-12);
            let mut best = f64::INFINITY;
            self.image_index.for_each_candidate(fx, half, |j| {
                let dy = metric.distance(fx, self.value(j));
                if dy < best && self.domain.metric().distance(px, self.domain.point(j)) >= r {
                    best = dy;
                }
            });
            if best <= rho || half >= reach {
                return best;
            }
            rho *= 2.0;
        }
    }

    /// `L_f(x,r) / l_f(x,r)` with a zero denominator read as infinity.
    pub fn distortion_ratio(&self, x: usize, r: f64) -> Result<f64> {
        let upper = self.upper(x, r)?;
        let lower = self.lower(x, r)?;
        Ok(ratio(upper, lower))
    }

    /// Same mapping into a target whose metric differs (e.g. rescaled).
    pub fn with_target(&self, target: Arc<MetricMeasureSpace>) -> Result<Self> {
        Self::new(self.domain.clone(), target, self.values.clone(), self.injective)
    }
}

/// `a / b` where a zero denominator gives infinity (also for `0 / 0`).
#[inline]
pub fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::INFINITY
    } else {
        a / b
    }
}

/// JSON mapping file: one target coordinate vector per domain point, in
/// domain order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MappingFile {
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub injective: bool,
}

impl MappingFile {
    pub fn from_mapping(m: &SampledMapping) -> Self {
        Self {
            values: m
                .values
                .chunks(m.target.dim())
                .map(|c| c.to_vec())
                .collect(),
            injective: m.injective,
        }
    }

    pub fn into_mapping(
        self,
        domain: Arc<MetricMeasureSpace>,
        target: Arc<MetricMeasureSpace>,
    ) -> Result<SampledMapping> {
        let td = target.dim();
        let mut flat = Vec::with_capacity(self.values.len() * td);
        for v in &self.values {
            if v.len() != td {
                return Err(MappingError::Parse(format!(
                    "value with {} coordinates, target has {td}",
                    v.len()
                )));
            }
            flat.extend_from_slice(v);
        }
        SampledMapping::new(domain, target, flat, self.injective)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(h: f64) -> Arc<MetricMeasureSpace> {
        Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], h).unwrap())
    }

    fn id_at(s: &MetricMeasureSpace, p: &[f64]) -> usize {
        s.nearest(p).unwrap().0
    }

    #[test]
    fn identity_numbers() {
        let s = square(0.02);
        let f = SampledMapping::from_fn(s.clone(), s.clone(), true, |x| x.to_vec()).unwrap();
        let x = id_at(&s, &[0.5, 0.5]);
        let up = f.upper(x, 0.1).unwrap();
        let low = f.lower(x, 0.1).unwrap();
        assert!((up - 0.1).abs() <= 0.02 && up <= 0.1);
        assert!((low - 0.1).abs() <= 0.02 && low >= 0.1);
        assert!((f.distortion_ratio(x, 0.1).unwrap() - 1.0).abs() < 0.2);
    }

    #[test]
    fn doubling_map_scales_both_numbers() {
        let s = square(0.02);
        let big = Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[2.0, 2.0], 0.04).unwrap());
        let f = SampledMapping::from_fn(s.clone(), big, true, |x| vec![2.0 * x[0], 2.0 * x[1]])
            .unwrap();
        let x = id_at(&s, &[0.5, 0.5]);
        assert!((f.lower(x, 0.1).unwrap() - 0.2).abs() <= 0.04);
        assert!((f.upper(x, 0.1).unwrap() - 0.2).abs() <= 0.04);
    }

    #[test]
    fn constant_map_has_zero_numbers_and_infinite_ratio() {
        let s = square(0.1);
        let f = SampledMapping::from_fn(s.clone(), s.clone(), false, |_| vec![0.3, 0.3]).unwrap();
        assert_eq!(f.upper(5, 0.3).unwrap(), 0.0);
        assert_eq!(f.lower(5, 0.3).unwrap(), 0.0);
        assert_eq!(f.distortion_ratio(5, 0.3).unwrap(), f64::INFINITY);
    }

    #[test]
    fn lower_without_far_points_is_infinite() {
        let s = square(0.25);
        let f = SampledMapping::from_fn(s.clone(), s.clone(), true, |x| x.to_vec()).unwrap();
        assert_eq!(f.lower(0, 10.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn lower_matches_brute_force() {
        let s = square(0.05);
        let f = SampledMapping::from_fn(s.clone(), s.clone(), true, |x| {
            vec![x[0] + 0.3 * (5.0 * x[1]).sin(), x[1] * x[1]]
        });
        // not injective at the resolution scale; build without the check
        let f = match f {
            Ok(f) => f,
            Err(_) => SampledMapping::from_fn(s.clone(), s.clone(), false, |x| {
                vec![x[0] + 0.3 * (5.0 * x[1]).sin(), x[1] * x[1]]
            })
            .unwrap(),
        };
        for x in [0usize, 37, 210, 399] {
            for r in [0.07, 0.2, 0.5] {
                let brute = (0..s.len())
                    .filter(|&j| s.distance(x, j) >= r)
                    .map(|j| f.image_distance(x, j))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(f.lower(x, r).unwrap(), brute);
            }
        }
    }

    #[test]
    fn collapsing_map_is_not_injective() {
        let s = square(0.1);
        let r = SampledMapping::from_fn(s.clone(), s.clone(), true, |x| vec![x[0], 0.5]);
        assert!(matches!(r, Err(MappingError::NotInjective(..))));
    }

    #[test]
    fn mapping_file_round_trip() {
        let s = square(0.25);
        let f = SampledMapping::from_fn(s.clone(), s.clone(), true, |x| vec![x[1], x[0]]).unwrap();
        let text = serde_json::to_string(&MappingFile::from_mapping(&f)).unwrap();
        let back: MappingFile = serde_json::from_str(&text).unwrap();
        let g = back.into_mapping(s.clone(), s).unwrap();
        assert_eq!(g.values(), f.values());
    }
}
