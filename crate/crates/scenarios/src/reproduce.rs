use std::collections::HashMap;
use std::sync::Arc;

use mapping_numbers::{asymptotic_field, FieldKind, FieldParams, PointwiseField, Selection};
use regularity_certify::{certify, classify_points, Certificate, Part, Partition, Theorem};
use serde::{Deserialize, Serialize};
use space_core::{Metric, NormMetric};

use crate::expect::{Basis, Comparator, Expectation, Quantity};
use crate::generate::{separable_average, singular_distance};
use crate::{Result, Scenario, ScenarioError, ScenarioName};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub label: String,
    pub basis: Basis,
    pub comparator: Comparator,
    pub measured: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: ScenarioName,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

/// Results shared between the expectations of one scenario.
#[derive(Default)]
pub struct Cache {
    certificates: HashMap<Theorem, Certificate>,
    partitions: HashMap<Theorem, Partition>,
    fields: HashMap<FieldKind, PointwiseField>,
}

impl Cache {
    /// The certificate of the scenario's run for `theorem`, computed once.
    pub fn certificate(&mut self, s: &Scenario, theorem: Theorem) -> Result<&Certificate> {
        if !self.certificates.contains_key(&theorem) {
            let config = run_for(s, theorem)?;
            let cert = certify(&s.mapping, &s.weight, config)?;
            self.certificates.insert(theorem, cert);
        }
        Ok(&self.certificates[&theorem])
    }

    fn partition(&mut self, s: &Scenario, theorem: Theorem) -> Result<&Partition> {
        if !self.partitions.contains_key(&theorem) {
            let config = run_for(s, theorem)?;
            let partition = classify_points(&s.mapping, &config.classify_params(&s.weight))?;
            self.partitions.insert(theorem, partition);
        }
        Ok(&self.partitions[&theorem])
    }

    fn field(&mut self, s: &Scenario, kind: FieldKind) -> Result<&PointwiseField> {
        if !self.fields.contains_key(&kind) {
            let field = evaluate(s, &s.mapping, kind)?;
            self.fields.insert(kind, field);
        }
        Ok(&self.fields[&kind])
    }
}

fn run_for(s: &Scenario, theorem: Theorem) -> Result<&regularity_certify::CertifyConfig> {
    s.run(theorem).ok_or_else(|| {
        ScenarioError::InvalidParameter(format!("{} has no {theorem} run", s.name))
    })
}

fn selection(s: &Scenario) -> Selection {
    if s.fields.stride > 1 {
        Selection::InteriorStride(s.fields.stride)
    } else {
        Selection::Interior
    }
}

fn evaluate(
    s: &Scenario,
    mapping: &mapping_numbers::SampledMapping,
    kind: FieldKind,
) -> Result<PointwiseField> {
    let params = if kind.is_weighted() {
        FieldParams::weighted(s.weight.clone(), s.fields.spread).with_exponent(s.fields.q)
    } else {
        FieldParams::default()
    };
    Ok(asymptotic_field(
        mapping,
        kind,
        &s.fields.schedule()?,
        &params,
        &selection(s),
    )?)
}

fn segment_points(s: &Scenario, points: &[usize]) -> Vec<bool> {
    let h = s.domain().resolution();
    points
        .iter()
        .map(|&p| singular_distance(s, s.domain().point(p)) < h / 2.0)
        .collect()
}

/// Closed-form jump mass of the strip boundaries resolved at level `j`
/// inside the window of the certificate run.
fn strip_jump_mass(s: &Scenario, j: usize) -> Result<f64> {
    let run = run_for(s, Theorem::Bv)?;
    let coarsest = run.levels.iter().copied().min().unwrap_or(j);
    let margin = (run.spread + 1.0) / coarsest as f64;
    let height = (1.0 - 2.0 * margin).max(0.0);
    let last = crate::generate::last_jump(s.params.strips);
    let mut total = 0.0;
    for m in 2..=last {
        let at = 1.0 / m as f64;
        if at >= 1.0 - margin {
            continue;
        }
        let right = 1.0 / (m - 1) as f64 - at;
        let left = if m == last { at } else { at - 1.0 / (m + 1) as f64 };
        if right.min(left) >= 1.0 / j as f64 {
            total += crate::strip_jump(m) * height;
        }
    }
    Ok(total)
}

/// Evaluates one expected quantity.
pub fn measure(s: &Scenario, quantity: &Quantity, cache: &mut Cache) -> Result<f64> {
    Ok(match quantity {
        Quantity::FieldDeviation {
            kind,
            center,
            clearance,
        } => {
            let field = cache.field(s, *kind)?;
            let mut worst = 0.0f64;
            for (pos, &p) in field.points.iter().enumerate() {
                if singular_distance(s, s.domain().point(p)) < *clearance {
                    continue;
                }
                let v = field.values[pos];
                let dev = if *center == 0.0 { v.abs() } else { (v / center - 1.0).abs() };
                worst = worst.max(dev);
            }
            worst
        }
        Quantity::FieldMax { kind } => cache.field(s, *kind)?.max_value(),
        Quantity::RescaleInvariance => {
            let factor = 2.0;
            let target = s.mapping.target();
            let metric = match target.metric() {
                Metric::Norm(n) => Metric::Norm(n.scaled(factor)),
                Metric::Custom(_) => Metric::Norm(NormMetric::euclidean().scaled(factor)),
            };
            let scaled = s.mapping.with_target(Arc::new(target.with_metric(metric)?))?;
            let mut worst = 0.0f64;
            for kind in [FieldKind::DistortionUpper, FieldKind::DistortionLower] {
                let base = cache.field(s, kind)?.values.clone();
                let other = evaluate(s, &scaled, kind)?;
                for (a, b) in base.iter().zip(&other.values) {
                    worst = worst.max((a - b).abs());
                }
            }
            worst
        }
        Quantity::Verdict { theorem } => {
            if cache.certificate(s, *theorem)?.verdict.pass {
                1.0
            } else {
                0.0
            }
        }
        Quantity::MaxEnergy { theorem } => cache
            .certificate(s, *theorem)?
            .energies
            .iter()
            .map(|e| e.energy)
            .fold(0.0, f64::max),
        Quantity::WindowEnergyRatio { theorem, from, to } => {
            let cert = cache.certificate(s, *theorem)?;
            let at = |j: usize| {
                cert.energies
                    .iter()
                    .find(|e| e.level == j)
                    .map(|e| e.window_energy)
                    .ok_or_else(|| ScenarioError::InvalidParameter(format!("no level {j}")))
            };
            at(*to)? / at(*from)?
        }
        Quantity::JumpMassRatio { from, to } => {
            strip_jump_mass(s, *to)? / strip_jump_mass(s, *from)?
        }
        Quantity::EquiDecays { theorem } => {
            if cache.certificate(s, *theorem)?.full_equi.decays {
                1.0
            } else {
                0.0
            }
        }
        Quantity::CurvePassFraction { theorem } => {
            cache.certificate(s, *theorem)?.curves.pass_fraction
        }
        Quantity::DistortionBand => {
            let domain = s.domain();
            let h = domain.resolution();
            let (mut inside, mut total) = (0usize, 0usize);
            for cells in [16.0, 24.0, 32.0] {
                // off the lattice, so rim membership does not hinge on rounding
                let r = (cells + 0.5) * h;
                for p in (0..domain.len()).step_by(37) {
                    let x = domain.point(p);
                    if x.iter().any(|&t| t < r + h || t > 1.0 - r - h) {
                        continue;
                    }
                    let ratio = s.mapping.upper(p, r)? / s.mapping.lower(p, r)?;
                    let avg = separable_average(x[1], r);
                    total += 1;
                    if ratio >= 0.9 * avg && ratio <= 1.1 * 2.0 * avg {
                        inside += 1;
                    }
                }
            }
            inside as f64 / total.max(1) as f64
        }
        Quantity::LipEnergy => {
            let field = cache.field(s, FieldKind::LipLower)?;
            let domain = s.domain();
            field
                .points
                .iter()
                .zip(&field.values)
                .map(|(&p, v)| v * v * domain.weight(p))
                .sum()
        }
        Quantity::SegmentLipMax => {
            let field = cache.field(s, FieldKind::WeightedLip)?;
            let on = segment_points(s, &field.points);
            field
                .values
                .iter()
                .zip(on)
                .filter(|(_, on)| *on)
                .map(|(v, _)| *v)
                .fold(0.0, f64::max)
        }
        Quantity::SegmentInLipschitzPart => {
            let part = cache.partition(s, Theorem::Bv)?;
            let on = segment_points(s, &part.points);
            let (mut hit, mut total) = (0usize, 0usize);
            for (k, on) in on.into_iter().enumerate() {
                if on {
                    total += 1;
                    hit += (part.part[k] == Part::A) as usize;
                }
            }
            hit as f64 / total.max(1) as f64
        }
        Quantity::FarInDistortionPart => {
            let part = cache.partition(s, Theorem::Bv)?;
            let far = 4.0 * part.schedule.radii().last().copied().unwrap_or(0.0);
            let (mut hit, mut total) = (0usize, 0usize);
            for (k, &p) in part.points.iter().enumerate() {
                if singular_distance(s, s.domain().point(p)) >= far {
                    total += 1;
                    hit += (part.part[k] == Part::D) as usize;
                }
            }
            hit as f64 / total.max(1) as f64
        }
        Quantity::SweepMinimum { theorem } => cache
            .certificate(s, *theorem)?
            .sweep
            .iter()
            .map(|p| p.value)
            .fold(f64::INFINITY, f64::min),
    })
}

/// Measures every expectation of the scenario.
pub fn reproduce(s: &Scenario) -> Result<Report> {
    let mut cache = Cache::default();
    let mut checks = Vec::with_capacity(s.expectations.len());
    for Expectation {
        label,
        quantity,
        comparator,
        basis,
    } in &s.expectations
    {
        let measured = measure(s, quantity, &mut cache)?;
        checks.push(CheckOutcome {
            label: label.clone(),
            basis: *basis,
            comparator: *comparator,
            measured,
            pass: comparator.holds(measured),
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        scenario: s.name,
        checks,
        pass,
    })
}

/// Smallest factor by which the plain upper Lipschitz quotient grows on the
/// line of a `dirac` scenario when the finest field radius is halved.
pub fn dirac_line_growth(s: &Scenario) -> Result<f64> {
    if s.name != ScenarioName::Dirac {
        return Err(ScenarioError::InvalidParameter(format!(
            "{} has no point masses",
            s.name
        )));
    }
    let r = *s.fields.radii.last().expect("nonempty schedule");
    let field = evaluate(s, &s.mapping, FieldKind::LipUpper)?;
    let on = segment_points(s, &field.points);
    let mut growth = f64::INFINITY;
    for (&p, on) in field.points.iter().zip(on) {
        if on {
            let coarse = s.mapping.upper(p, r)? / r;
            let fine = s.mapping.upper(p, r / 2.0)? / (r / 2.0);
            growth = growth.min(fine / coarse);
        }
    }
    Ok(growth)
}
