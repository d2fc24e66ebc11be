use curves_modulus::CurveFamily;
use mapping_numbers::SampledMapping;
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::num;

/// Worst integral of `g_j` over sets of prescribed mass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquiReport {
    /// mass fractions `delta` of the whole domain, decreasing
    pub fractions: Vec<f64>,
    /// `sup_j` of the concentrated integral at each fraction
    #[serde(with = "num::vec")]
    pub concentrated: Vec<f64>,
    /// the same per level, row per level
    pub per_level: Vec<Vec<f64>>,
    /// ratio of the concentrated integrals at the smallest and largest
    /// fraction divided by the ratio of the fractions; one for a bounded
    /// density, large when mass piles up on small sets
    #[serde(with = "num")]
    pub concentration: f64,
    /// slope of `ln` of the concentrated integral at the smallest fraction
    /// against `ln j`; near zero when the levels converge
    #[serde(with = "num")]
    pub level_growth: f64,
    pub decays: bool,
}

/// Level growth exponents at or above this count as non-decay.
pub const LEVEL_GROWTH_LIMIT: f64 = 0.5;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0 && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn concentrated(space: &MetricMeasureSpace, g: &[f64], mass: f64) -> f64 {
    let mu = space.weights();
    let mut order: Vec<usize> = (0..g.len()).filter(|&i| g[i] > 0.0).collect();
    order.sort_by(|&a, &b| g[b].total_cmp(&g[a]).then(a.cmp(&b)));
    let (mut taken, mut sum) = (0.0, 0.0);
    for i in order {
        if taken >= mass {
            break;
        }
        let part = mu[i].min(mass - taken);
        taken += part;
        sum += g[i] * part;
    }
    sum
}

/// For every mass fraction `delta`, the largest `integral_E g_j` over the
/// levels, with `E` the points of largest `g_j` up to mass
/// `delta * mu(domain)`. `levels[k]` is the level of `densities[k]`.
pub fn equi_integrability_probe(
    space: &MetricMeasureSpace,
    levels: &[usize],
    densities: &[&[f64]],
    fractions: &[f64],
) -> EquiReport {
    assert_eq!(levels.len(), densities.len(), "one level per density");
    let mut fractions = fractions.to_vec();
    fractions.sort_by(|a, b| b.total_cmp(a));
    let total = space.total_weight();
    let per_level: Vec<Vec<f64>> = densities
        .iter()
        .map(|g| {
            fractions
                .iter()
                .map(|&d| concentrated(space, g, d * total))
                .collect()
        })
        .collect();
    let concentrated: Vec<f64> = (0..fractions.len())
        .map(|k| per_level.iter().map(|row| row[k]).fold(0.0, f64::max))
        .collect();
    let concentration = match (concentrated.first(), concentrated.last()) {
        (Some(&big), Some(&small)) if big > 0.0 => {
            (small / big) / (fractions[fractions.len() - 1] / fractions[0])
        }
        _ => 0.0,
    };
    let spread = match (fractions.first(), fractions.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        _ => 1.0,
    };
    let js: Vec<f64> = levels.iter().map(|&j| j as f64).collect();
    let smallest: Vec<f64> = per_level.iter().map(|row| *row.last().unwrap_or(&0.0)).collect();
    let level_growth = slope(&js, &smallest);
    EquiReport {
        decays: concentration <= spread.sqrt() && level_growth < LEVEL_GROWTH_LIMIT,
        level_growth,
        fractions,
        concentrated,
        per_level,
        concentration,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveOutcome {
    pub endpoint_distance: f64,
    /// smallest curve integral over the tail levels
    #[serde(with = "num")]
    pub tail_min: f64,
    pub pass: bool,
    /// the curve runs close to a point the sequence does not control
    pub exempt: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvewiseReport {
    pub curves: Vec<CurveOutcome>,
    pub exempt: usize,
    /// among the curves that are not exempt; one when there are none
    pub pass_fraction: f64,
}

impl CurvewiseReport {
    pub fn failing(&self) -> Vec<usize> {
        (0..self.curves.len())
            .filter(|&k| !self.curves[k].exempt && !self.curves[k].pass)
            .collect()
    }
}

/// Checks `d(f(start), f(end)) <= min over the last `tail` levels of the
/// curve integral of `g_j` for every curve. Curves through a point flagged in
/// `exempt` are reported but left out of the pass fraction.
pub fn curvewise_verification(
    mapping: &SampledMapping,
    densities: &[&[f64]],
    family: &CurveFamily,
    exempt: &[bool],
    tail: usize,
) -> CurvewiseReport {
    let start = densities.len().saturating_sub(tail.max(1));
    let mut curves = Vec::with_capacity(family.len());
    for c in &family.curves {
        let endpoint_distance = mapping.image_distance(c.start(), c.end());
        let tail_min = densities[start..]
            .iter()
            .map(|g| c.integral(g))
            .fold(f64::INFINITY, f64::min);
        curves.push(CurveOutcome {
            endpoint_distance,
            tail_min,
            pass: endpoint_distance <= tail_min * (1.0 + 1e-9),
            exempt: c.vertices().iter().any(|&v| exempt.get(v).copied().unwrap_or(false)),
        });
    }
    let counted: Vec<&CurveOutcome> = curves.iter().filter(|c| !c.exempt).collect();
    let pass_fraction = if counted.is_empty() {
        1.0
    } else {
        counted.iter().filter(|c| c.pass).count() as f64 / counted.len() as f64
    };
    CurvewiseReport {
        exempt: curves.len() - counted.len(),
        curves,
        pass_fraction,
    }
}
