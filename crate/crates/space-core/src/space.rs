use serde::{Deserialize, Serialize};

use crate::index::GridIndex;
use crate::metric::Metric;
use crate::{Result, SpaceError};

/// Axis-aligned region descriptor `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&v, (&l, &h))| v >= l && v <= h)
    }
}

/// A resolved ball: the members are exactly the sampled points satisfying
/// `d(y, center) < radius` (open) or `<= radius` (closed).
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub closed: bool,
    pub members: Vec<usize>,
}

/// Weighted point cloud with a distance oracle.
#[derive(Clone, Debug)]
pub struct MetricMeasureSpace {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    resolution: f64,
    bounds: Option<Bounds>,
    metric: Metric,
    index: GridIndex,
}

impl MetricMeasureSpace {
    /// Builds a space and measures its resolution (smallest nearest-neighbour
    /// distance). Coincident points are rejected.
    pub fn new(
        dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        bounds: Option<Bounds>,
        metric: Metric,
    ) -> Result<Self> {
        let mut space = Self::assemble(dim, coords, weights, bounds, metric, f64::NAN)?;
        space.resolution = space.measure_resolution()?;
        Ok(space)
    }

    /// Builds a space whose spacing is known by construction (e.g. a grid).
    pub fn with_spacing(
        dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        bounds: Option<Bounds>,
        metric: Metric,
        spacing: f64,
    ) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(SpaceError::InvalidParameter(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        Self::assemble(dim, coords, weights, bounds, metric, spacing)
    }

    fn assemble(
        dim: usize,
        coords: Vec<f64>,
        weights: Vec<f64>,
        bounds: Option<Bounds>,
        metric: Metric,
        spacing: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(SpaceError::InvalidParameter("dimension must be >= 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(SpaceError::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        let n = coords.len() / dim;
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        if weights.len() != n {
            return Err(SpaceError::Parse(format!(
                "{} weights for {} points",
                weights.len(),
                n
            )));
        }
        if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
            return Err(SpaceError::Parse(format!(
                "non-finite coordinate at point {}",
                i / dim
            )));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(SpaceError::BadWeight { index, value });
            }
        }
        if !(weights.iter().sum::<f64>() > 0.0) {
            return Err(SpaceError::ZeroTotalWeight);
        }
        if let Some(b) = &bounds {
            if b.lo.len() != dim || b.hi.len() != dim {
                return Err(SpaceError::DimensionMismatch {
                    expected: dim,
                    found: b.lo.len(),
                });
            }
        }
        let cell = GridIndex::suggested_cell(&coords, dim, spacing);
        let index = GridIndex::build(&coords, dim, cell);
        Ok(Self {
            dim,
            coords,
            weights,
            resolution: spacing,
            bounds,
            metric,
            index,
        })
    }

    fn measure_resolution(&self) -> Result<f64> {
        let n = self.len();
        if n == 1 {
            return Ok(f64::INFINITY);
        }
        let mut best = f64::INFINITY;
        for i in 0..n {
            let (j, d) = self
                .nearest_excluding(self.point(i), Some(i))
                .expect("at least two points");
            if d == 0.0 {
                return Err(SpaceError::DuplicatePoint(i.min(j), i.max(j)));
            }
            best = best.min(d);
        }
        Ok(best)
    }

    /// Uniform cell-centred grid on `[lo, hi]` with spacing close to `h`
    /// (rounded so that each axis holds a whole number of cells).
    pub fn uniform_grid(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(SpaceError::InvalidParameter(format!("spacing {h}")));
        }
        let counts: Vec<usize> = lo
            .iter()
            .zip(hi)
            .map(|(&l, &u)| (((u - l) / h).round() as usize).max(1))
            .collect();
        Self::uniform_grid_counts(lo, hi, &counts)
    }

    /// Cell-centred grid with `counts[k]` cells along axis `k`; every point
    /// carries the cell volume as its weight.
    pub fn uniform_grid_counts(lo: &[f64], hi: &[f64], counts: &[usize]) -> Result<Self> {
        let dim = lo.len();
        if hi.len() != dim || counts.len() != dim {
            return Err(SpaceError::DimensionMismatch {
                expected: dim,
                found: hi.len().min(counts.len()),
            });
        }
        if counts.iter().any(|&c| c == 0) || lo.iter().zip(hi).any(|(l, u)| !(u > l)) {
            return Err(SpaceError::InvalidParameter("degenerate grid box".into()));
        }
        let steps: Vec<f64> = (0..dim)
            .map(|k| (hi[k] - lo[k]) / counts[k] as f64)
            .collect();
        let cell_volume: f64 = steps.iter().product();
        let n: usize = counts.iter().product();
        let mut coords = Vec::with_capacity(n * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..n {
            for k in 0..dim {
                coords.push(lo[k] + (idx[k] as f64 + 0.5) * steps[k]);
            }
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let spacing = steps.iter().cloned().fold(f64::INFINITY, f64::min);
        Self::with_spacing(
            dim,
            coords,
            vec![cell_volume; n],
            Some(Bounds::new(lo.to_vec(), hi.to_vec())),
            Metric::default(),
            spacing,
        )
    }

    /// Same points and metric, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        let mut s = Self::assemble(
            self.dim,
            self.coords.clone(),
            weights,
            self.bounds.clone(),
            self.metric.clone(),
            self.resolution,
        )?;
        s.resolution = self.resolution;
        Ok(s)
    }

    /// Same points and weights under a different metric. The resolution is
    /// re-measured unless the metric is a rescaling of a norm metric.
    pub fn with_metric(&self, metric: Metric) -> Result<Self> {
        let factor = match (self.metric.scale(), metric.scale()) {
            (Some(a), Some(b))
                if self.metric.as_norm().map(|m| m.norm) == metric.as_norm().map(|m| m.norm) =>
            {
                Some(b / a)
            }
            _ => None,
        };
        match factor {
            Some(f) => Self::with_spacing(
                self.dim,
                self.coords.clone(),
                self.weights.clone(),
                self.bounds.clone(),
                metric,
                self.resolution * f,
            ),
            None => Self::new(
                self.dim,
                self.coords.clone(),
                self.weights.clone(),
                self.bounds.clone(),
                metric,
            ),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Smallest inter-point spacing `h`.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Radii below `2h` are treated as discretisation noise.
    pub fn trusted_floor(&self) -> f64 {
        2.0 * self.resolution
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        self.bounds.as_ref()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    pub fn check_point(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(SpaceError::UnknownPoint(i))
        }
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric.distance(self.point(i), self.point(j))
    }

    #[inline]
    pub fn distance_to(&self, x: &[f64], j: usize) -> f64 {
        self.metric.distance(x, self.point(j))
    }

    /// Upper estimate of the diameter: the region box diagonal when a region
    /// is attached, otherwise the bounding-box diagonal of the samples.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = match &self.bounds {
            Some(b) => (b.lo.clone(), b.hi.clone()),
            None => {
                let mut lo = vec![f64::INFINITY; self.dim];
                let mut hi = vec![f64::NEG_INFINITY; self.dim];
                for p in self.coords.chunks_exact(self.dim) {
                    for k in 0..self.dim {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
        };
        self.metric.distance(&lo, &hi)
    }

    /// Visits every point `y` with `d(x, y) < r` (or `<= r` when `closed`),
    /// passing the point id and its distance.
    #[inline]
    pub fn for_each_within(&self, x: &[f64], r: f64, closed: bool, mut f: impl FnMut(usize, f64)) {
        let half = self.metric.box_radius(r) * (1.0 + 1e-12) + 1e-300;
        self.index.for_each_candidate(x, half, |j| {
            let d = self.metric.distance(x, self.point(j));
            if d < r || (closed && d == r) {
                f(j, d);
            }
        });
    }

    pub fn ball(&self, center: usize, radius: f64, closed: bool) -> Result<Ball> {
        self.check_point(center)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(SpaceError::InvalidRadius(radius));
        }
        let mut members = Vec::new();
        self.for_each_within(self.point(center), radius, closed, |j, _| members.push(j));
        members.sort_unstable();
        Ok(Ball {
            center,
            radius,
            closed,
            members,
        })
    }

    pub fn measure_of_ball(&self, ball: &Ball) -> f64 {
        ball.members.iter().map(|&j| self.weights[j]).sum()
    }

    /// Mass of the ball around arbitrary coordinates under `weights`
    /// (one entry per point; pass `self.weights()` for the native measure).
    pub fn mass_within(&self, x: &[f64], r: f64, closed: bool, weights: &[f64]) -> f64 {
        let mut m = 0.0;
        self.for_each_within(x, r, closed, |j, _| m += weights[j]);
        m
    }

    /// Nearest sampled point to `x`.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        self.nearest_excluding(x, None)
    }

    fn nearest_excluding(&self, x: &[f64], skip: Option<usize>) -> Option<(usize, f64)> {
        if self.len() <= skip.map_or(0, |_| 1) {
            return None;
        }
        let mut half = self.index.cell();
        loop {
            let mut best: Option<(usize, f64)> = None;
            self.index.for_each_candidate(x, half, |j| {
                if Some(j) == skip {
                    return;
                }
                let d = self.metric.distance(x, self.point(j));
                if best.map_or(true, |(bj, bd)| d < bd || (d == bd && j < bj)) {
                    best = Some((j, d));
                }
            });
            // Only trust the candidate if the whole d-ball fits in the searched box.
            if let Some((j, d)) = best {
                if self.metric.box_radius(d) <= half {
                    return Some((j, d));
                }
            }
            half *= 2.0;
            if half > 1e300 {
                return best;
            }
        }
    }

    /// Spot check of the metric axioms on `samples` pseudo-random triples.
    /// Returns the first violated triple, if any.
    pub fn spot_check_metric(&self, samples: usize, seed: u64) -> Option<(usize, usize, usize)> {
        let n = self.len() as u64;
        let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 33) % n) as usize
        };
        for _ in 0..samples {
            let (a, b, c) = (next(), next(), next());
            let (ab, ba) = (self.distance(a, b), self.distance(b, a));
            let (bc, ac) = (self.distance(b, c), self.distance(a, c));
            let tol = 1e-12 * (ab + bc + ac).max(1.0);
            let symmetric = (ab - ba).abs() <= tol;
            let positive = ab >= 0.0 && (a == b) == (ab == 0.0);
            let triangle = ac <= ab + bc + tol;
            if !(symmetric && positive && triangle) {
                return Some((a, b, c));
            }
        }
        None
    }
}
