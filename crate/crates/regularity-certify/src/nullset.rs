use curves_modulus::{gamma_a_family, p_modulus, SolverBudget};
use hausdorff_content::{admissible_density, codim_content, nested_covers};
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::chain::ARITHMETIC_TOLERANCE;
use crate::{num, Result};

/// Curves of the family must integrate the density to at least this.
pub const ADMISSIBLE_FLOOR: f64 = 0.95;

/// A density of small `p`-energy that every sampled curve through the set
/// integrates to about one or more.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusVanishing {
    pub epsilon: f64,
    pub p: f64,
    pub caps: Vec<f64>,
    pub budgets: Vec<f64>,
    /// largest `mu(2B) / mu(B)` over the cover balls
    pub doubling: f64,
    /// `integral rho^p`
    pub energy: f64,
    /// `doubling * epsilon`
    pub energy_bound: f64,
    pub energy_within_bound: bool,
    pub curves: usize,
    pub min_length: f64,
    #[serde(with = "num")]
    pub min_integral: f64,
    pub all_admissible: bool,
    /// discrete modulus of the family, when solved
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<f64>,
    /// the modulus stays below the energy of the rescaled density
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus_below_energy: Option<bool>,
}

/// Nested covers of `set` with budgets `2^-i epsilon`, the density
/// `sup 1_{2B}/r` built from them, and a sampled family of curves through
/// `set` no shorter than twice the largest cover radius.
#[allow(clippy::too_many_arguments)]
pub fn modulus_vanishing(
    space: &MetricMeasureSpace,
    set: &[usize],
    p: f64,
    epsilon: f64,
    first_cap: f64,
    max_levels: usize,
    n_curves: usize,
    seed: u64,
    solve_modulus: bool,
) -> Result<ModulusVanishing> {
    let levels = nested_covers(space, set, p, epsilon, first_cap, 2, max_levels)?;
    let rho = admissible_density(space, &levels)?;
    let mu = space.weights();
    let energy: f64 = rho.iter().zip(mu).map(|(r, w)| r.powf(p) * w).sum();
    let mut doubling = 1.0f64;
    for lv in &levels {
        for b in &lv.cover.balls {
            let x = space.point(b.center);
            let small = space.mass_within(x, b.radius, false, mu);
            let big = space.mass_within(x, 2.0 * b.radius, false, mu);
            if small > 0.0 {
                doubling = doubling.max(big / small);
            }
        }
    }
    let energy_bound = doubling * epsilon;
    let min_length = 2.0 * levels[0].cap;
    let family = gamma_a_family(space, set, n_curves, min_length, seed)?;
    let min_integral = family
        .curves
        .iter()
        .map(|c| c.integral(&rho))
        .fold(f64::INFINITY, f64::min);
    let (modulus, modulus_below_energy) = if solve_modulus {
        let report = p_modulus(space, &family, p, &SolverBudget::default())?;
        let ceiling = energy / min_integral.powf(p);
        (
            Some(report.value),
            Some(report.value <= ceiling * (1.0 + 1e-6)),
        )
    } else {
        (None, None)
    };
    Ok(ModulusVanishing {
        epsilon,
        p,
        caps: levels.iter().map(|l| l.cap).collect(),
        budgets: levels.iter().map(|l| l.budget).collect(),
        doubling,
        energy,
        energy_bound,
        energy_within_bound: energy <= energy_bound * (1.0 + ARITHMETIC_TOLERANCE),
        curves: family.len(),
        min_length,
        min_integral,
        all_admissible: min_integral >= ADMISSIBLE_FLOOR,
        modulus,
        modulus_below_energy,
    })
}

/// Whether curves through the exceptional set can be neglected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSetReport {
    pub points: usize,
    pub p: f64,
    pub cap: f64,
    /// codimension-`p` content at the finest trusted cap
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<f64>,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<ModulusVanishing>,
    pub holds: bool,
    pub note: String,
}

/// Empty sets pass. Otherwise the content of `set` at the trusted floor must
/// not exceed `threshold`, and the modulus-vanishing construction with budget
/// `threshold` must succeed.
pub fn null_set_check(
    space: &MetricMeasureSpace,
    set: &[usize],
    p: f64,
    threshold: f64,
    seed: u64,
) -> Result<NullSetReport> {
    let cap = space.trusted_floor();
    let mut report = NullSetReport {
        points: set.len(),
        p,
        cap,
        content: None,
        threshold,
        pipeline: None,
        holds: true,
        note: "empty".into(),
    };
    if set.is_empty() {
        return Ok(report);
    }
    let est = codim_content(space, set, p, cap, 1)?;
    report.content = Some(est.estimate);
    if est.estimate > threshold {
        report.holds = false;
        report.note = format!(
            "content {:.4e} above the threshold {threshold:.4e}; unverified",
            est.estimate
        );
        return Ok(report);
    }
    match modulus_vanishing(space, set, p, threshold, 8.0 * cap, 4, 24, seed, false) {
        Ok(mv) => {
            report.holds = mv.all_admissible && mv.energy_within_bound;
            report.note = if report.holds {
                "modulus-vanishing density constructed".into()
            } else {
                "modulus-vanishing density failed its checks".into()
            };
            report.pipeline = Some(mv);
        }
        Err(e) => {
            report.holds = false;
            report.note = format!("modulus-vanishing construction failed: {e}");
        }
    }
    Ok(report)
}
