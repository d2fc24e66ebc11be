use std::f64::consts::PI;
use std::sync::Arc;

use mapping_numbers::{FieldKind, RadonWeight, SampledMapping};
use regularity_certify::{CertifyConfig, HField, Theorem};
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::expect::{Basis, Comparator, Expectation, Quantity};
use crate::{FieldSetup, Result, Scenario, ScenarioError, ScenarioName};

/// Generator parameters; every field has a per-scenario default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// grid spacing of the domain
    pub resolution: Option<f64>,
    /// number of materialized strips
    pub strips: usize,
    /// `(height, mass)` of the point masses of the `dirac` measure
    pub masses: Vec<(f64, f64)>,
    /// factor of the `scaling` map
    pub scale: f64,
    /// Hölder exponent of the cusps
    pub cusp_exponent: f64,
    /// half width of the region each cusp bends
    pub cusp_width: f64,
    /// first coordinates of the vertical segments of `jumpset`
    pub segments: Vec<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            resolution: None,
            strips: 12,
            masses: vec![(0.5, 1.0)],
            scale: 2.0,
            cusp_exponent: 0.75,
            cusp_width: 0.1,
            segments: vec![0.35, 0.65],
        }
    }
}

fn default_resolution(name: ScenarioName) -> f64 {
    match name {
        ScenarioName::Identity | ScenarioName::Scaling | ScenarioName::Constant => 0.01,
        ScenarioName::Strips => 0.002,
        ScenarioName::Dirac => 1.0 / 201.0,
        ScenarioName::Separable | ScenarioName::Jumpset => 0.005,
    }
}

fn grid(lo: &[f64], hi: &[f64], h: f64) -> Result<Arc<MetricMeasureSpace>> {
    let counts: Vec<usize> = lo
        .iter()
        .zip(hi)
        .map(|(a, b)| ((b - a) / h).round().max(1.0) as usize)
        .collect();
    Ok(Arc::new(MetricMeasureSpace::uniform_grid_counts(lo, hi, &counts)?))
}

/// Centre of the grid cell of spacing `h` (anchored at `lo`) nearest to `t`.
fn snap(t: f64, lo: f64, h: f64) -> f64 {
    lo + (((t - lo) / h - 0.5).round() + 0.5) * h
}

/// Jump of the strip map across `x1 = 1/m`.
pub fn strip_jump(m: usize) -> f64 {
    2.0 - 2.0 / m as f64
}

/// Largest `m` with a jump at `1/m`; below the last reflected strip the
/// map is the identity.
pub(crate) fn last_jump(strips: usize) -> usize {
    if strips % 2 == 0 {
        strips + 1
    } else {
        strips
    }
}

fn strip_map(x1: f64, strips: usize) -> f64 {
    if x1 <= 0.0 || x1 < 1.0 / (strips + 1) as f64 {
        return x1;
    }
    // strip j is [1/(j+1), 1/j); the reciprocal may round across an edge
    let mut j = (1.0 / x1).floor() as usize;
    if j > 1 && x1 >= 1.0 / j as f64 {
        j -= 1;
    } else if x1 < 1.0 / (j + 1) as f64 {
        j += 1;
    }
    if j % 2 == 0 {
        2.0 - x1
    } else {
        x1
    }
}

fn separable_primitive(s: f64) -> f64 {
    s + 1.5 * s.powf(2.0 / 3.0)
}

fn separable_density(s: f64) -> f64 {
    1.0 + s.powf(-1.0 / 3.0)
}

fn cusp(t: f64, centers: &[f64], alpha: f64, width: f64) -> f64 {
    for &c in centers {
        let d = t - c;
        if d.abs() < width {
            return c + d.signum() * d.abs().powf(alpha) * width.powf(1.0 - alpha);
        }
    }
    t
}

fn trivial_fields() -> FieldSetup {
    FieldSetup {
        radii: vec![0.16, 0.08, 0.04],
        tail: 2,
        spread: 1.0,
        q: 2.0,
        stride: 1,
    }
}

fn deviation(label: &str, kind: FieldKind, center: f64, clearance: f64, basis: Basis) -> Expectation {
    Expectation::new(
        label,
        Quantity::FieldDeviation {
            kind,
            center,
            clearance,
        },
        Comparator::AtMost(0.1),
        basis,
    )
}

fn verdict(label: &str, theorem: Theorem, pass: bool, basis: Basis) -> Expectation {
    Expectation::new(
        label,
        Quantity::Verdict { theorem },
        Comparator::Equals(if pass { 1.0 } else { 0.0 }),
        basis,
    )
}

/// Builds the named scenario. Equal inputs give bit-identical data.
pub fn generate(name: ScenarioName, params: &Params) -> Result<Scenario> {
    let mut params = params.clone();
    let h = params.resolution.unwrap_or_else(|| default_resolution(name));
    if !(h > 0.0 && h < 0.25) {
        return Err(ScenarioError::InvalidParameter(format!("resolution {h}")));
    }
    params.resolution = Some(h);
    let unit = grid(&[0.0, 0.0], &[1.0, 1.0], h)?;
    let mut notes = Vec::new();
    let scenario = match name {
        ScenarioName::Identity => {
            let target = grid(&[-0.5, -0.5], &[1.5, 1.5], h)?;
            let mapping = SampledMapping::from_fn(unit, target, true, |x| x.to_vec())?;
            let runs: Vec<CertifyConfig> = Theorem::ALL
                .into_iter()
                .map(|theorem| CertifyConfig {
                    theorem,
                    p: 1.5,
                    ..CertifyConfig::default()
                })
                .collect();
            let mut expectations = vec![
                deviation("Lip is one", FieldKind::LipUpper, 1.0, 0.0, Basis::Sanity),
                deviation("H is one", FieldKind::DistortionUpper, 1.0, 0.0, Basis::Sanity),
            ];
            for t in Theorem::ALL {
                expectations.push(verdict(&format!("{t} passes with h = 1"), t, true, Basis::Sanity));
            }
            expectations.push(Expectation::new(
                "curves pass",
                Quantity::CurvePassFraction {
                    theorem: Theorem::Bv,
                },
                Comparator::Equals(1.0),
                Basis::Sanity,
            ));
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight: RadonWeight::base(),
                fields: trivial_fields(),
                runs,
                expectations,
                notes,
            }
        }
        ScenarioName::Scaling => {
            let c = params.scale;
            if !(c > 0.0 && c.is_finite()) {
                return Err(ScenarioError::InvalidParameter(format!("scale {c}")));
            }
            let target = grid(&[-0.5, -0.5], &[c + 0.5, c + 0.5], h)?;
            let mapping =
                SampledMapping::from_fn(unit, target, true, move |x| vec![c * x[0], c * x[1]])?;
            let expectations = vec![
                deviation("Lip is the factor", FieldKind::LipUpper, c, 0.0, Basis::Sanity),
                deviation("H is one", FieldKind::DistortionUpper, 1.0, 0.0, Basis::Sanity),
                Expectation::new(
                    "distortion ignores target rescaling",
                    Quantity::RescaleInvariance,
                    Comparator::Equals(0.0),
                    Basis::Sanity,
                ),
                verdict("bv passes", Theorem::Bv, true, Basis::Sanity),
            ];
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight: RadonWeight::base(),
                fields: trivial_fields(),
                runs: vec![CertifyConfig {
                    h: HField::Constant(c),
                    ..CertifyConfig::default()
                }],
                expectations,
                notes,
            }
        }
        ScenarioName::Constant => {
            let mapping = SampledMapping::from_fn(unit.clone(), unit, false, |_| vec![0.5, 0.5])?;
            let expectations = vec![
                Expectation::new(
                    "Lip vanishes",
                    Quantity::FieldMax {
                        kind: FieldKind::LipUpper,
                    },
                    Comparator::Equals(0.0),
                    Basis::Sanity,
                ),
                Expectation::new(
                    "lip vanishes",
                    Quantity::FieldMax {
                        kind: FieldKind::LipLower,
                    },
                    Comparator::Equals(0.0),
                    Basis::Sanity,
                ),
                Expectation::new(
                    "energies vanish",
                    Quantity::MaxEnergy {
                        theorem: Theorem::Bv,
                    },
                    Comparator::Equals(0.0),
                    Basis::Sanity,
                ),
                verdict("bv passes", Theorem::Bv, true, Basis::Sanity),
            ];
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight: RadonWeight::base(),
                fields: trivial_fields(),
                runs: vec![CertifyConfig::default()],
                expectations,
                notes,
            }
        }
        ScenarioName::Strips => {
            let k = params.strips;
            if k < 2 {
                return Err(ScenarioError::InvalidParameter(format!("{k} strips")));
            }
            let narrowest = 1.0 / k as f64 - 1.0 / (k + 1) as f64;
            if narrowest < 2.0 * h {
                return Err(ScenarioError::TooCoarse {
                    resolution: h,
                    strips: k,
                });
            }
            let domain = grid(&[-1.0, 0.0], &[1.0, 1.0], h)?;
            let target = grid(&[-1.0, 0.0], &[2.0, 1.0], 1.5 * h)?;
            let mapping = SampledMapping::from_fn(domain, target, true, move |x| {
                vec![strip_map(x[0], k), x[1]]
            })?;
            notes.push(format!(
                "strips narrower than {:.3e} are replaced by the identity",
                narrowest
            ));
            let fields = FieldSetup {
                radii: vec![16.0 * h, 8.0 * h, 4.0 * h],
                tail: 2,
                spread: 1.0,
                q: 2.0,
                stride: 8,
            };
            let clearance = 16.0 * h + 2.0 * h;
            let expectations = vec![
                Expectation::new(
                    "window energy grows from level 8 to 32",
                    Quantity::WindowEnergyRatio {
                        theorem: Theorem::Bv,
                        from: 8,
                        to: 32,
                    },
                    Comparator::AtLeast(1.5),
                    Basis::Oracle,
                ),
                Expectation::new(
                    "jump mass of resolved strips, 32 over 8",
                    Quantity::JumpMassRatio { from: 8, to: 32 },
                    Comparator::Report,
                    Basis::Record,
                ),
                Expectation::new(
                    "concentrated gradient mass does not decay",
                    Quantity::EquiDecays {
                        theorem: Theorem::Bv,
                    },
                    Comparator::Equals(0.0),
                    Basis::Oracle,
                ),
                deviation("Lip is one off the boundaries", FieldKind::LipUpper, 1.0, clearance, Basis::Analytic),
                deviation(
                    "H is one off the boundaries",
                    FieldKind::DistortionUpper,
                    1.0,
                    clearance,
                    Basis::Analytic,
                ),
                verdict("bv with kappa = mu fails", Theorem::Bv, false, Basis::Oracle),
            ];
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight: RadonWeight::base(),
                fields,
                runs: vec![CertifyConfig {
                    stride: 8,
                    curves: 24,
                    ..CertifyConfig::default()
                }],
                expectations,
                notes,
            }
        }
        ScenarioName::Dirac => {
            if params.masses.is_empty() {
                return Err(ScenarioError::InvalidParameter("no point masses".into()));
            }
            let mut masses = Vec::with_capacity(params.masses.len());
            for &(y, m) in &params.masses {
                if !(y > 0.0 && y < 1.0 && m > 0.0) {
                    return Err(ScenarioError::InvalidParameter(format!(
                        "point mass {m} at {y}"
                    )));
                }
                masses.push((snap(y, 0.0, h), m));
            }
            let total: f64 = masses.iter().map(|p| p.1).sum();
            let target = Arc::new(MetricMeasureSpace::uniform_grid(
                &[-0.5],
                &[1.5 + total],
                h,
            )?);
            let jumps = masses.clone();
            let mapping = SampledMapping::from_fn(unit.clone(), target, false, move |x| {
                let steps: f64 = jumps.iter().filter(|(y, _)| x[1] >= *y).map(|p| p.1).sum();
                vec![x[1] + steps]
            })?;
            let mut weight = RadonWeight::base();
            for i in 0..unit.len() {
                let x = unit.point(i);
                for &(y, m) in &masses {
                    if (x[1] - y).abs() < h / 4.0 {
                        weight.add_mass(i, m * h);
                    }
                }
            }
            notes.push("point masses sit on the nearest grid row".into());
            let fields = FieldSetup {
                radii: vec![0.08, 0.04, 0.02],
                tail: 2,
                spread: 2.0,
                q: 2.0,
                stride: 1,
            };
            let expectations = vec![
                Expectation::new(
                    "Lip^(kappa,2) stays below 2 pi",
                    Quantity::FieldMax {
                        kind: FieldKind::WeightedLip,
                    },
                    Comparator::AtMost(2.0 * PI * 1.15),
                    Basis::Analytic,
                ),
                verdict("bv passes with h = 2 pi", Theorem::Bv, true, Basis::Analytic),
                Expectation::new(
                    "curves pass",
                    Quantity::CurvePassFraction {
                        theorem: Theorem::Bv,
                    },
                    Comparator::Equals(1.0),
                    Basis::Oracle,
                ),
            ];
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight,
                fields,
                runs: vec![CertifyConfig {
                    spread: 2.0,
                    levels: vec![16, 32, 64],
                    h: HField::Constant(2.0 * PI),
                    ..CertifyConfig::default()
                }],
                expectations,
                notes,
            }
        }
        ScenarioName::Separable => {
            let target = grid(&[-0.1, -0.1], &[1.1, 2.6], h)?;
            let mapping = SampledMapping::from_fn(unit.clone(), target, true, |x| {
                vec![x[0], separable_primitive(x[1])]
            })?;
            let density: Vec<f64> = (0..unit.len())
                .map(|i| separable_density(unit.point(i)[1]).powi(2))
                .collect();
            let fields = FieldSetup {
                radii: vec![0.08, 0.04, 0.02],
                tail: 2,
                spread: 2.0,
                q: 2.0,
                stride: 1,
            };
            notes.push("the squared lower Lipschitz energy is recorded, not judged".into());
            let expectations = vec![
                Expectation::new(
                    "H^(a,2) stays below 2 pi",
                    Quantity::FieldMax {
                        kind: FieldKind::WeightedDistortion,
                    },
                    Comparator::AtMost(2.0 * PI * 1.15),
                    Basis::Analytic,
                ),
                Expectation::new(
                    "finite-radius distortion within [avg g, 2 avg g]",
                    Quantity::DistortionBand,
                    Comparator::AtLeast(1.0),
                    Basis::Analytic,
                ),
                verdict("distortion route passes at p = 1", Theorem::SobolevDistortion, true, Basis::Analytic),
                Expectation::new(
                    "curves pass",
                    Quantity::CurvePassFraction {
                        theorem: Theorem::SobolevDistortion,
                    },
                    Comparator::Equals(1.0),
                    Basis::Oracle,
                ),
                Expectation::new("integral of lip^2", Quantity::LipEnergy, Comparator::Report, Basis::Record),
            ];
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight: RadonWeight::with_density(density),
                fields,
                runs: vec![CertifyConfig {
                    theorem: Theorem::SobolevDistortion,
                    p: 1.0,
                    spread: 2.0,
                    h: HField::Constant(4.0 * PI * PI),
                    ..CertifyConfig::default()
                }],
                expectations,
                notes,
            }
        }
        ScenarioName::Jumpset => {
            let alpha = params.cusp_exponent;
            let w = params.cusp_width;
            if !(alpha > 0.5 && alpha < 1.0) || !(w > 2.0 * h) {
                return Err(ScenarioError::InvalidParameter(format!(
                    "cusp exponent {alpha}, width {w}"
                )));
            }
            let mut centers: Vec<f64> = params.segments.iter().map(|&c| snap(c, 0.0, h)).collect();
            centers.sort_by(f64::total_cmp);
            if centers.is_empty()
                || centers[0] < w
                || centers[centers.len() - 1] > 1.0 - w
                || centers.windows(2).any(|p| p[1] - p[0] < 2.0 * w)
            {
                return Err(ScenarioError::InvalidParameter(format!(
                    "segments {centers:?} must be {} apart and inside",
                    2.0 * w
                )));
            }
            let target = grid(&[-0.1, -0.1], &[1.1, 1.1], h)?;
            let bend = centers.clone();
            let mapping = SampledMapping::from_fn(unit.clone(), target, true, move |x| {
                vec![cusp(x[0], &bend, alpha, w), x[1]]
            })?;
            let mut weight = RadonWeight::base();
            for i in 0..unit.len() {
                let x = unit.point(i);
                for (k, &c) in centers.iter().enumerate() {
                    if (x[0] - c).abs() < h / 4.0 {
                        // segments have unit length
                        weight.add_mass(i, 0.5f64.powi(k as i32 + 1) * h);
                    }
                }
            }
            notes.push("segments sit on the nearest grid column".into());
            let fields = FieldSetup {
                radii: vec![0.08, 0.04, 0.02],
                tail: 2,
                spread: 1.0,
                q: 2.0,
                stride: 1,
            };
            let expectations = vec![
                Expectation::new(
                    "Lip^(kappa,1) is small on the segments",
                    Quantity::SegmentLipMax,
                    Comparator::AtMost(0.5),
                    Basis::Analytic,
                ),
                Expectation::new(
                    "segment points are Lipschitz-controlled",
                    Quantity::SegmentInLipschitzPart,
                    Comparator::AtLeast(1.0),
                    Basis::Analytic,
                ),
                Expectation::new(
                    "points away from the segments are distortion-controlled",
                    Quantity::FarInDistortionPart,
                    Comparator::AtLeast(1.0),
                    Basis::Analytic,
                ),
                verdict("bv passes", Theorem::Bv, true, Basis::Analytic),
                Expectation::new(
                    "smallest bound over the epsilon sweep",
                    Quantity::SweepMinimum {
                        theorem: Theorem::Bv,
                    },
                    Comparator::Report,
                    Basis::Record,
                ),
            ];
            Scenario {
                name,
                params: params.clone(),
                mapping,
                weight,
                fields,
                runs: vec![CertifyConfig {
                    lip_cutoff: 0.5,
                    h: HField::Constant(4.0),
                    ..CertifyConfig::default()
                }],
                expectations,
                notes,
            }
        }
    };
    Ok(scenario)
}

/// Distance from `x` to the set where the scenario's mapping is singular;
/// infinite for the smooth scenarios.
pub(crate) fn singular_distance(s: &Scenario, x: &[f64]) -> f64 {
    match s.name {
        ScenarioName::Strips => {
            (2..=last_jump(s.params.strips))
                .map(|m| (x[0] - 1.0 / m as f64).abs())
                .fold(x[0].abs(), f64::min)
        }
        ScenarioName::Dirac => {
            let h = s.params.resolution.unwrap_or(0.0);
            s.params
                .masses
                .iter()
                .map(|&(y, _)| (x[1] - snap(y, 0.0, h)).abs())
                .fold(f64::INFINITY, f64::min)
        }
        ScenarioName::Jumpset => {
            let h = s.params.resolution.unwrap_or(0.0);
            s.params
                .segments
                .iter()
                .map(|&c| (x[0] - snap(c, 0.0, h)).abs())
                .fold(f64::INFINITY, f64::min)
        }
        _ => f64::INFINITY,
    }
}

pub(crate) fn separable_average(x2: f64, r: f64) -> f64 {
    (separable_primitive(x2 + r) - separable_primitive(x2 - r)) / (2.0 * r)
}
