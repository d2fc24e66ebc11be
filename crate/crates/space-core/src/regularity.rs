use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::space::MetricMeasureSpace;
use crate::{Result, SpaceError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusRatio {
    pub radius: f64,
    pub max_ratio: f64,
    pub argmax: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingEstimate {
    /// max over points and radii of mu(B(x,2r)) / mu(B(x,r))
    pub c_d_hat: f64,
    pub per_radius: Vec<RadiusRatio>,
    pub floor: f64,
}

fn check_schedule(space: &MetricMeasureSpace, radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(SpaceError::EmptySchedule);
    }
    let floor = space.trusted_floor();
    for &r in radii {
        if !(r > 0.0) || !r.is_finite() {
            return Err(SpaceError::InvalidRadius(r));
        }
        if r < floor * (1.0 - 1e-9) {
            return Err(SpaceError::BelowTrustedFloor { radius: r, floor });
        }
    }
    Ok(())
}

fn points_of(space: &MetricMeasureSpace, subset: Option<&[usize]>) -> Result<Vec<usize>> {
    match subset {
        Some(s) => {
            for &i in s {
                space.check_point(i)?;
            }
            Ok(s.to_vec())
        }
        None => Ok((0..space.len()).collect()),
    }
}

/// Open-ball masses `mu(B(x, r_k))` for every radius in `radii` at once.
pub(crate) fn ball_masses(space: &MetricMeasureSpace, i: usize, radii: &[f64]) -> Vec<f64> {
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let mut masses = vec![0.0; radii.len()];
    let w = space.weights();
    space.for_each_within(space.point(i), rmax, false, |j, d| {
        for (k, &r) in radii.iter().enumerate() {
            if d < r {
                masses[k] += w[j];
            }
        }
    });
    masses
}

/// Empirical doubling constant over the sample points (or `subset`) and the
/// radius schedule. Radii below the trusted floor are refused.
pub fn doubling_constant_estimate(
    space: &MetricMeasureSpace,
    radii: &[f64],
    subset: Option<&[usize]>,
) -> Result<DoublingEstimate> {
    if radii.is_empty() {
        return Err(SpaceError::EmptySchedule);
    }
    let floor = space.trusted_floor();
    if space.len() == 1 {
        return Ok(DoublingEstimate {
            c_d_hat: 1.0,
            per_radius: radii
                .iter()
                .map(|&radius| RadiusRatio {
                    radius,
                    max_ratio: 1.0,
                    argmax: 0,
                })
                .collect(),
            floor,
        });
    }
    check_schedule(space, radii)?;
    let pts = points_of(space, subset)?;
    let mut both: Vec<f64> = radii.to_vec();
    both.extend(radii.iter().map(|r| 2.0 * r));
    let k = radii.len();
    let ratios: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|&i| {
            let m = ball_masses(space, i, &both);
            (0..k)
                .map(|t| {
                    let (small, big) = (m[t], m[t + k]);
                    if small > 0.0 {
                        big / small
                    } else if big > 0.0 {
                        f64::INFINITY
                    } else {
                        1.0
                    }
                })
                .collect()
        })
        .collect();
    let mut per_radius = Vec::with_capacity(k);
    for (t, &radius) in radii.iter().enumerate() {
        let mut best = RadiusRatio {
            radius,
            max_ratio: 0.0,
            argmax: pts.first().copied().unwrap_or(0),
        };
        for (row, &i) in ratios.iter().zip(&pts) {
            if row[t] > best.max_ratio {
                best.max_ratio = row[t];
                best.argmax = i;
            }
        }
        per_radius.push(best);
    }
    let c_d_hat = per_radius.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    Ok(DoublingEstimate {
        c_d_hat,
        per_radius,
        floor,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AhlforsReport {
    pub q: f64,
    pub c_a_hat: f64,
    /// max of mu(B)/r^Q
    pub upper_hat: f64,
    /// max of r^Q/mu(B)
    pub lower_hat: f64,
    /// per radius: max over points of max(mu/r^Q, r^Q/mu)
    pub per_radius: Vec<RadiusRatio>,
    pub stable: bool,
    pub pass: bool,
}

/// Two-sided Ahlfors regularity estimate. The check passes when the constant
/// is finite and its per-radius values stay within `stability_factor` of each
/// other across the schedule.
pub fn ahlfors_check(
    space: &MetricMeasureSpace,
    q: f64,
    radii: &[f64],
    subset: Option<&[usize]>,
    stability_factor: f64,
) -> Result<AhlforsReport> {
    if !(q > 1.0) {
        return Err(SpaceError::InvalidParameter(format!("Q must exceed 1, got {q}")));
    }
    check_schedule(space, radii)?;
    let pts = points_of(space, subset)?;
    let masses: Vec<Vec<f64>> = pts.par_iter().map(|&i| ball_masses(space, i, radii)).collect();
    let mut upper_hat: f64 = 0.0;
    let mut lower_hat: f64 = 0.0;
    let mut per_radius = Vec::with_capacity(radii.len());
    for (t, &radius) in radii.iter().enumerate() {
        let rq = radius.powf(q);
        let mut best = RadiusRatio {
            radius,
            max_ratio: 0.0,
            argmax: 0,
        };
        for (row, &i) in masses.iter().zip(&pts) {
            let m = row[t];
            if !(m > 0.0) {
                return Err(SpaceError::DegenerateBall { point: i, radius });
            }
            let (up, low) = (m / rq, rq / m);
            upper_hat = upper_hat.max(up);
            lower_hat = lower_hat.max(low);
            let c = up.max(low);
            if c > best.max_ratio {
                best.max_ratio = c;
                best.argmax = i;
            }
        }
        per_radius.push(best);
    }
    let c_a_hat = upper_hat.max(lower_hat);
    let hi = per_radius.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    let lo = per_radius
        .iter()
        .map(|r| r.max_ratio)
        .fold(f64::INFINITY, f64::min);
    let stable = hi <= stability_factor * lo;
    Ok(AhlforsReport {
        q,
        c_a_hat,
        upper_hat,
        lower_hat,
        per_radius,
        stable,
        pass: c_a_hat.is_finite() && stable,
    })
}

/// Points at distance more than `delta` from the complement of the region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerRegion {
    pub delta: f64,
    pub members: Vec<usize>,
}

impl InnerRegion {
    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

pub fn inner_region(space: &MetricMeasureSpace, delta: f64) -> Result<InnerRegion> {
    if !(delta >= 0.0) {
        return Err(SpaceError::InvalidParameter(format!("delta {delta}")));
    }
    let b = space.bounds().ok_or(SpaceError::NoRegion)?;
    let members = (0..space.len())
        .filter(|&i| {
            space
                .metric()
                .distance_to_box_complement(space.point(i), &b.lo, &b.hi)
                > delta
        })
        .collect();
    Ok(InnerRegion { delta, members })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub link_radius: f64,
    pub components: usize,
    pub largest: usize,
}

/// Components of the graph linking points within `link_radius` of each other.
pub fn connectivity(space: &MetricMeasureSpace, link_radius: f64) -> ConnectivityReport {
    let n = space.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        let mut nbrs = Vec::new();
        space.for_each_within(space.point(i), link_radius, true, |j, _| {
            if j > i {
                nbrs.push(j)
            }
        });
        for j in nbrs {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sizes = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sizes[r] += 1;
    }
    ConnectivityReport {
        link_radius,
        components: sizes.iter().filter(|&&s| s > 0).count(),
        largest: sizes.into_iter().max().unwrap_or(0),
    }
}
