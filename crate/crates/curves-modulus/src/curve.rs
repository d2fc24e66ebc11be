use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::{CurveError, Result};

/// Arc-length parametrized polyline through sample points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    vertices: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Curve {
    /// Consecutive duplicate vertices are dropped; consecutive vertices must
    /// be within twice the resolution.
    pub fn new(space: &MetricMeasureSpace, vertices: Vec<usize>) -> Result<Self> {
        let mut v: Vec<usize> = Vec::with_capacity(vertices.len());
        for x in vertices {
            space.check_point(x)?;
            if v.last() != Some(&x) {
                v.push(x);
            }
        }
        if v.len() < 2 {
            return Err(CurveError::Degenerate);
        }
        let gap = 2.0 * space.resolution() * (1.0 + 1e-9);
        let mut cumulative = vec![0.0];
        for w in v.windows(2) {
            let d = space.distance(w[0], w[1]);
            if d > gap {
                return Err(CurveError::Gap(w[0], w[1], d));
            }
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Ok(Self {
            vertices: v,
            cumulative,
        })
    }

    /// Like [`Curve::new`] without the spacing requirement, for coarse
    /// polylines whose densities are known to be smooth.
    pub fn new_unchecked_spacing(space: &MetricMeasureSpace, vertices: Vec<usize>) -> Result<Self> {
        let mut v: Vec<usize> = Vec::with_capacity(vertices.len());
        for x in vertices {
            space.check_point(x)?;
            if v.last() != Some(&x) {
                v.push(x);
            }
        }
        if v.len() < 2 {
            return Err(CurveError::Degenerate);
        }
        let mut cumulative = vec![0.0];
        for w in v.windows(2) {
            cumulative.push(cumulative.last().unwrap() + space.distance(w[0], w[1]));
        }
        Ok(Self {
            vertices: v,
            cumulative,
        })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn cumulative_length(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    /// Trapezoid weight of every vertex: half the length of the adjacent
    /// segments. `integral(rho) = sum weight_v * rho_v`.
    pub fn quadrature(&self) -> Vec<(usize, f64)> {
        let n = self.vertices.len();
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(n);
        for i in 0..n {
            let left = if i > 0 {
                self.cumulative[i] - self.cumulative[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n {
                self.cumulative[i + 1] - self.cumulative[i]
            } else {
                0.0
            };
            out.push((self.vertices[i], 0.5 * (left + right)));
        }
        // a curve may revisit a point; merge those weights
        out.sort_by_key(|e| e.0);
        out.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        out
    }

    /// Composite trapezoid rule for `rho` along the polyline.
    pub fn integral(&self, rho: &[f64]) -> f64 {
        self.vertices
            .windows(2)
            .zip(self.cumulative.windows(2))
            .map(|(v, c)| 0.5 * (rho[v[0]] + rho[v[1]]) * (c[1] - c[0]))
            .sum()
    }

    /// Integral over the sub-polyline between vertex positions `a <= b`.
    pub fn partial_integral(&self, rho: &[f64], a: usize, b: usize) -> f64 {
        (a..b)
            .map(|i| {
                0.5 * (rho[self.vertices[i]] + rho[self.vertices[i + 1]])
                    * (self.cumulative[i + 1] - self.cumulative[i])
            })
            .sum()
    }

    /// Samples visited by the straight segment from `from` to `to`, snapped
    /// to the nearest sample every quarter resolution.
    pub fn snapped_segment(space: &MetricMeasureSpace, from: &[f64], to: &[f64]) -> Vec<usize> {
        let len = from
            .iter()
            .zip(to)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let steps = ((len / (0.25 * space.resolution())).ceil() as usize).max(1);
        let mut out: Vec<usize> = Vec::with_capacity(steps / 2);
        let mut p = vec![0.0; from.len()];
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            for k in 0..p.len() {
                p[k] = from[k] + t * (to[k] - from[k]);
            }
            if let Some((j, _)) = space.nearest(&p) {
                if out.last() != Some(&j) {
                    out.push(j);
                }
            }
        }
        out
    }
}

/// A finite stand-in for a curve family, with the generator that produced it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveFamily {
    pub curves: Vec<Curve>,
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CurveFamily {
    pub fn explicit(curves: Vec<Curve>) -> Self {
        Self {
            curves,
            generator: "explicit".into(),
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Union of two families (curves of `self` first).
    pub fn union(&self, other: &CurveFamily) -> CurveFamily {
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().cloned());
        CurveFamily {
            curves,
            generator: format!("{}+{}", self.generator, other.generator),
            seed: None,
        }
    }

    /// Straight curves along the first axis, one per distinct sample row.
    pub fn axis_lines(space: &MetricMeasureSpace, axis: usize) -> Result<Self> {
        let dim = space.dim();
        if axis >= dim {
            return Err(CurveError::InvalidParameter(format!("axis {axis} in dimension {dim}")));
        }
        let mut rows: std::collections::BTreeMap<Vec<u64>, Vec<usize>> = Default::default();
        for i in 0..space.len() {
            let key: Vec<u64> = space
                .point(i)
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != axis)
                .map(|(_, v)| v.to_bits())
                .collect();
            rows.entry(key).or_default().push(i);
        }
        let mut curves = Vec::with_capacity(rows.len());
        for (_, mut row) in rows {
            row.sort_by(|&a, &b| space.point(a)[axis].total_cmp(&space.point(b)[axis]));
            if row.len() >= 2 {
                curves.push(Curve::new(space, row)?);
            }
        }
        Ok(Self {
            curves,
            generator: format!("axis-lines-{axis}"),
            seed: None,
        })
    }
}

/// Curves through points of `set`, each of length at least `min_length`,
/// passing the chosen point at between a quarter and three quarters of its
/// length. The first curves run along the coordinate axes, the rest in random
/// directions. Curves that would leave the region bounds are redrawn.
pub fn gamma_a_family(
    space: &MetricMeasureSpace,
    set: &[usize],
    n_curves: usize,
    min_length: f64,
    seed: u64,
) -> Result<CurveFamily> {
    if set.is_empty() {
        return Err(CurveError::EmptySet);
    }
    if !(min_length > 0.0) {
        return Err(CurveError::InvalidParameter(format!("min length {min_length}")));
    }
    let dim = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = |p: &[f64]| space.bounds().map_or(true, |b| b.contains(p));
    let mut curves = Vec::with_capacity(n_curves);
    let mut attempts = 0usize;
    while curves.len() < n_curves {
        attempts += 1;
        if attempts > 200 * (n_curves + 1) {
            return Err(CurveError::NoRoom(min_length));
        }
        let a = set[rng.gen_range(0..set.len())];
        let pa = space.point(a).to_vec();
        let idx = curves.len();
        let dir: Vec<f64> = if idx < 2 * dim {
            let mut d = vec![0.0; dim];
            d[(idx / 2) % dim] = if idx % 2 == 0 { 1.0 } else { -1.0 };
            d
        } else {
            loop {
                let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n > 0.1 && n <= 1.0 {
                    break d.into_iter().map(|v| v / n).collect();
                }
            }
        };
        let len = min_length * rng.gen_range(1.0..1.5);
        let frac = rng.gen_range(0.25..0.75);
        let from: Vec<f64> = (0..dim).map(|k| pa[k] - frac * len * dir[k]).collect();
        let to: Vec<f64> = (0..dim).map(|k| pa[k] + (1.0 - frac) * len * dir[k]).collect();
        if !inside(&from) || !inside(&to) {
            continue;
        }
        let mut verts = Curve::snapped_segment(space, &from, &pa);
        verts.pop();
        verts.extend(Curve::snapped_segment(space, &pa, &to));
        let Ok(curve) = Curve::new(space, verts) else {
            continue;
        };
        if curve.length() < min_length || !curve.vertices().contains(&a) {
            continue;
        }
        curves.push(curve);
    }
    Ok(CurveFamily {
        curves,
        generator: "gamma-A".into(),
        seed: Some(seed),
    })
}
