use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use space_core::inner_region;

use crate::mapping::{ratio, SampledMapping};
use crate::schedule::RadiusSchedule;
use crate::weight::RadonWeight;
use crate::{MappingError, Result};

/// Fitted decay exponents at or above this count as divergence.
pub const DIVERGENCE_EXPONENT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    /// liminf of `L_f / r`
    #[serde(rename = "lip")]
    LipLower,
    /// limsup of `L_f / r`
    #[serde(rename = "Lip")]
    LipUpper,
    /// liminf of `L_f / l_f`
    #[serde(rename = "h")]
    DistortionLower,
    /// limsup of `L_f / l_f`
    #[serde(rename = "H")]
    DistortionUpper,
    /// limsup of `(L_f / r) * mu(B(x,Mr)) / kappa(B(x,Mr))`
    #[serde(rename = "Lip_generalized")]
    WeightedLip,
    /// limsup of `(L_f / l_f) * (mu / kappa over B(x,Mr))^((Q-1)/Q)`
    #[serde(rename = "H_generalized")]
    WeightedDistortion,
}

impl FieldKind {
    pub const ALL: [FieldKind; 6] = [
        FieldKind::LipLower,
        FieldKind::LipUpper,
        FieldKind::DistortionLower,
        FieldKind::DistortionUpper,
        FieldKind::WeightedLip,
        FieldKind::WeightedDistortion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::LipLower => "lip",
            FieldKind::LipUpper => "Lip",
            FieldKind::DistortionLower => "h",
            FieldKind::DistortionUpper => "H",
            FieldKind::WeightedLip => "Lip_generalized",
            FieldKind::WeightedDistortion => "H_generalized",
        }
    }

    pub fn is_weighted(self) -> bool {
        matches!(self, FieldKind::WeightedLip | FieldKind::WeightedDistortion)
    }

    pub fn uses_lower(self) -> bool {
        matches!(
            self,
            FieldKind::DistortionLower | FieldKind::DistortionUpper | FieldKind::WeightedDistortion
        )
    }

    /// The kind without the density factor.
    pub fn unweighted(self) -> Option<FieldKind> {
        match self {
            FieldKind::WeightedLip => Some(FieldKind::LipUpper),
            FieldKind::WeightedDistortion => Some(FieldKind::DistortionUpper),
            _ => None,
        }
    }

    /// Upper kinds take the max over the tail, lower kinds the min.
    pub fn is_upper(self) -> bool {
        !matches!(self, FieldKind::LipLower | FieldKind::DistortionLower)
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FieldKind {
    type Err = MappingError;

    fn from_str(s: &str) -> Result<Self> {
        FieldKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MappingError::InvalidParameter(format!("unknown field kind {s:?}")))
    }
}

/// Which domain points to evaluate.
#[derive(Clone, Debug, PartialEq)]
pub enum Selection {
    All,
    /// Points whose `M * r_max` ball stays inside the domain bounds (all
    /// points when the domain has no bounds).
    Interior,
    /// Every `k`-th interior point.
    InteriorStride(usize),
    Points(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct FieldParams {
    pub weight: Option<RadonWeight>,
    /// Ball enlargement `M >= 1` for the weighted kinds.
    pub spread: f64,
    /// Exponent `Q > 1` for the weighted distortion.
    pub exponent: Option<f64>,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self {
            weight: None,
            spread: 1.0,
            exponent: None,
        }
    }
}

impl FieldParams {
    pub fn weighted(weight: RadonWeight, spread: f64) -> Self {
        Self {
            weight: Some(weight),
            spread,
            exponent: None,
        }
    }

    pub fn with_exponent(mut self, q: f64) -> Self {
        self.exponent = Some(q);
        self
    }
}

/// Raw per-radius numbers at one point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialProfile {
    /// `L_f(x, r)` (closed balls)
    pub upper: Vec<f64>,
    /// `l_f(x, r)`; empty when not requested, infinite when no sample is far enough
    pub lower: Vec<f64>,
    /// `mu(B(x, M r))` (open)
    pub base_mass: Vec<f64>,
    /// `kappa(B(x, M r))` (open)
    pub weight_mass: Vec<f64>,
}

/// One neighbour sweep per point yields the whole profile; the lower numbers
/// are finished by an exact search in the image seeded with the best
/// candidate seen in the sweep.
pub fn radial_profiles(
    mapping: &SampledMapping,
    points: &[usize],
    radii: &[f64],
    spread: f64,
    weight_masses: Option<&[f64]>,
    with_lower: bool,
) -> Vec<RadialProfile> {
    let domain = mapping.domain();
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let res = domain.resolution();
    let sweep = if with_lower {
        let pad = if res.is_finite() { 2.0 * res } else { 0.0 };
        (spread * rmax).max(1.25 * rmax + pad)
    } else {
        spread.max(1.0) * rmax
    };
    let w = domain.weights();
    let k = radii.len();
    points
        .par_iter()
        .map(|&x| {
            let mut p = RadialProfile {
                upper: vec![0.0; k],
                lower: Vec::new(),
                base_mass: vec![0.0; k],
                weight_mass: vec![0.0; k],
            };
            let mut seed = vec![f64::INFINITY; k];
            let fx = mapping.value(x);
            let metric = mapping.target().metric();
            domain.for_each_within(domain.point(x), sweep, true, |j, d| {
                let dy = metric.distance(fx, mapping.value(j));
                for t in 0..k {
                    let r = radii[t];
                    if d <= r {
                        if dy > p.upper[t] {
                            p.upper[t] = dy;
                        }
                    } else if dy < seed[t] {
                        seed[t] = dy;
                    }
                    if d < spread * r {
                        p.base_mass[t] += w[j];
                        if let Some(km) = weight_masses {
                            p.weight_mass[t] += km[j];
                        }
                    }
                }
            });
            if weight_masses.is_none() {
                p.weight_mass.clone_from(&p.base_mass);
            }
            if with_lower {
                // points at distance exactly r are missed by `d <= r` above
                // but the search below handles them.
                p.lower = (0..k)
                    .map(|t| {
                        if seed[t] == 0.0 {
                            0.0
                        } else {
                            mapping.lower_from(x, radii[t], seed[t])
                        }
                    })
                    .collect();
            }
            p
        })
        .collect()
}

/// A per-point asymptotic number with its convergence diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointwiseField {
    pub kind: FieldKind,
    pub radii: Vec<f64>,
    pub tail: usize,
    pub points: Vec<usize>,
    /// limsup (or liminf) proxy over the tail radii
    pub values: Vec<f64>,
    /// max / min of the quotient over the tail
    pub spread: Vec<f64>,
    /// fitted `alpha` in `quotient ~ r^-alpha` over the tail
    pub growth: Vec<f64>,
    pub diverging: Vec<bool>,
    /// quotient at every schedule radius, row-major by point
    pub quotients: Vec<f64>,
    /// (point, radius) pairs where no sample was at distance `>= r`
    pub missing_lower: usize,
    pub floor: f64,
}

impl PointwiseField {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, point: usize) -> Option<usize> {
        self.points.binary_search(&point).ok()
    }

    pub fn value_of(&self, point: usize) -> Option<f64> {
        self.position(point).map(|i| self.values[i])
    }

    pub fn quotients_at(&self, pos: usize) -> &[f64] {
        let k = self.radii.len();
        &self.quotients[pos * k..(pos + 1) * k]
    }

    /// Largest value, infinities included.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn diverging_count(&self) -> usize {
        self.diverging.iter().filter(|&&d| d).count()
    }

    /// CSV with columns `point, x1..xn, value, spread, growth, diverging`.
    pub fn write_csv(&self, mapping: &SampledMapping, mut out: impl Write) -> std::io::Result<()> {
        let dim = mapping.domain().dim();
        let mut header = vec!["point".to_string()];
        header.extend((1..=dim).map(|k| format!("x{k}")));
        header.extend(["value", "spread", "growth", "diverging"].map(String::from));
        writeln!(out, "{}", header.join(","))?;
        for (pos, &p) in self.points.iter().enumerate() {
            let mut row = vec![p.to_string()];
            row.extend(mapping.domain().point(p).iter().map(|&v| fmt_float(v)));
            row.push(fmt_float(self.values[pos]));
            row.push(fmt_float(self.spread[pos]));
            row.push(fmt_float(self.growth[pos]));
            row.push(self.diverging[pos].to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// 17 significant digits, `inf`/`-inf`/`nan` spelled out.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn resolve_points(
    mapping: &SampledMapping,
    selection: &Selection,
    margin: f64,
) -> Result<Vec<usize>> {
    let domain = mapping.domain();
    let interior = |stride: usize| -> Result<Vec<usize>> {
        let all: Vec<usize> = match domain.bounds() {
            Some(_) => inner_region(domain, margin)?.members,
            None => (0..domain.len()).collect(),
        };
        Ok(all.into_iter().step_by(stride.max(1)).collect())
    };
    match selection {
        Selection::All => Ok((0..domain.len()).collect()),
        Selection::Interior => interior(1),
        Selection::InteriorStride(k) => interior(*k),
        Selection::Points(p) => {
            let mut p = p.clone();
            p.sort_unstable();
            p.dedup();
            for &i in &p {
                domain.check_point(i)?;
            }
            Ok(p)
        }
    }
}

fn quotient(kind: FieldKind, p: &RadialProfile, t: usize, r: f64, power: f64) -> f64 {
    let density = || ratio(p.base_mass[t], p.weight_mass[t]);
    let q = match kind {
        FieldKind::LipLower | FieldKind::LipUpper => p.upper[t] / r,
        FieldKind::DistortionLower | FieldKind::DistortionUpper => ratio(p.upper[t], p.lower[t]),
        FieldKind::WeightedLip => (p.upper[t] / r) * density(),
        FieldKind::WeightedDistortion => ratio(p.upper[t], p.lower[t]) * density().powf(power),
    };
    if q.is_nan() {
        f64::INFINITY
    } else {
        q
    }
}

/// Least-squares slope of `ln q` against `ln(1/r)` over finite positive samples.
fn growth_exponent(radii: &[f64], q: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(q)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&r, &v)| (-r.ln(), v.ln()))
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

/// Evaluates one of the asymptotic numbers on the selected points.
pub fn asymptotic_field(
    mapping: &SampledMapping,
    kind: FieldKind,
    schedule: &RadiusSchedule,
    params: &FieldParams,
    selection: &Selection,
) -> Result<PointwiseField> {
    Ok(asymptotic_fields(mapping, &[kind], schedule, params, selection)?
        .pop()
        .expect("one kind in, one field out"))
}

/// Several asymptotic numbers from a single neighbour sweep per point. The
/// weighted kinds share `params`; the plain kinds ignore the enlargement.
pub fn asymptotic_fields(
    mapping: &SampledMapping,
    kinds: &[FieldKind],
    schedule: &RadiusSchedule,
    params: &FieldParams,
    selection: &Selection,
) -> Result<Vec<PointwiseField>> {
    let domain = mapping.domain();
    let floor = domain.trusted_floor();
    schedule.check_floor(floor)?;
    let weighted = kinds.iter().any(|k| k.is_weighted());
    let spread = if weighted { params.spread } else { 1.0 };
    if !(spread >= 1.0) || !spread.is_finite() {
        return Err(MappingError::InvalidParameter(format!(
            "ball enlargement must be at least 1, got {spread}"
        )));
    }
    let power = if kinds.contains(&FieldKind::WeightedDistortion) {
        let q = params
            .exponent
            .ok_or_else(|| MappingError::InvalidParameter("H_generalized needs Q".into()))?;
        if !(q > 1.0) {
            return Err(MappingError::InvalidParameter(format!("Q must exceed 1, got {q}")));
        }
        (q - 1.0) / q
    } else {
        1.0
    };
    let masses = match kinds.iter().find(|k| k.is_weighted()) {
        Some(kind) => {
            let w = params
                .weight
                .as_ref()
                .ok_or(MappingError::MissingWeight(kind.name()))?;
            Some(w.masses(domain)?)
        }
        None => None,
    };
    let points = resolve_points(mapping, selection, spread * schedule.largest())?;
    let radii = schedule.radii();
    // plain kinds see unit-enlargement masses only through the quotient,
    // which never reads them
    let profiles = radial_profiles(
        mapping,
        &points,
        radii,
        spread,
        masses.as_deref(),
        kinds.iter().any(|k| k.uses_lower()),
    );
    let k = radii.len();
    let tail_start = k - schedule.tail();
    let mut out = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut field = PointwiseField {
            kind,
            radii: radii.to_vec(),
            tail: schedule.tail(),
            points: points.clone(),
            values: Vec::with_capacity(points.len()),
            spread: Vec::with_capacity(points.len()),
            growth: Vec::with_capacity(points.len()),
            diverging: Vec::with_capacity(points.len()),
            quotients: Vec::with_capacity(points.len() * k),
            missing_lower: 0,
            floor,
        };
        for p in &profiles {
            if kind.uses_lower() {
                field.missing_lower += p.lower.iter().filter(|v| v.is_infinite()).count();
            }
            let q: Vec<f64> = (0..k).map(|t| quotient(kind, p, t, radii[t], power)).collect();
            let tail = &q[tail_start..];
            let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
            let value = if kind.is_upper() { hi } else { lo };
            let spread = if hi == 0.0 { 1.0 } else { ratio(hi, lo) };
            let alpha = growth_exponent(&radii[tail_start..], tail);
            let mut grows = tail.last().unwrap() > &tail[0];
            if let Some(plain) = kind.unweighted() {
                // the density factor is at most one, so only the plain
                // quotient can blow up
                let pq: Vec<f64> = (tail_start..k)
                    .map(|t| quotient(plain, p, t, radii[t], power))
                    .collect();
                grows &= pq.last().unwrap() > &pq[0]
                    && growth_exponent(&radii[tail_start..], &pq) >= DIVERGENCE_EXPONENT;
            }
            field.values.push(value);
            field.spread.push(spread);
            field.growth.push(alpha);
            field
                .diverging
                .push(value.is_infinite() || (alpha >= DIVERGENCE_EXPONENT && grows));
            field.quotients.extend(q);
        }
        out.push(field);
    }
    Ok(out)
}

/// A point where `L_f(x, r)` does not decay with `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpFlag {
    pub point: usize,
    /// `L_f(x, r_min)`
    pub jump: f64,
    /// `L_f(x, r_min) / L_f(x, r_max)`
    pub persistence: f64,
    /// limsup proxy of `H_f` at the point
    pub distortion: f64,
    pub distortion_diverging: bool,
}

/// Flags points where `L_f(x, r_min) / L_f(x, r_max)` exceeds
/// `sqrt(r_min / r_max)`: for continuous maps with a nonzero derivative the
/// ratio is about `r_min / r_max`, at a jump it stays near one.
pub fn discontinuity_scan(
    mapping: &SampledMapping,
    schedule: &RadiusSchedule,
    selection: &Selection,
) -> Result<Vec<JumpFlag>> {
    schedule.check_floor(mapping.domain().trusted_floor())?;
    let points = resolve_points(mapping, selection, schedule.largest())?;
    let ends = [schedule.largest(), schedule.smallest()];
    let threshold = (ends[1] / ends[0]).sqrt();
    let profiles = radial_profiles(mapping, &points, &ends, 1.0, None, false);
    let flagged: Vec<(usize, f64, f64)> = points
        .iter()
        .zip(&profiles)
        .filter_map(|(&x, p)| {
            let (big, small) = (p.upper[0], p.upper[1]);
            (small > 0.0 && small > threshold * big).then(|| (x, small, small / big))
        })
        .collect();
    if flagged.is_empty() {
        return Ok(Vec::new());
    }
    let h = asymptotic_field(
        mapping,
        FieldKind::DistortionUpper,
        schedule,
        &FieldParams::default(),
        &Selection::Points(flagged.iter().map(|f| f.0).collect()),
    )?;
    Ok(flagged
        .into_iter()
        .map(|(point, jump, persistence)| {
            let pos = h.position(point).expect("flagged point evaluated");
            JumpFlag {
                point,
                jump,
                persistence,
                distortion: h.values[pos],
                distortion_diverging: h.diverging[pos],
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use space_core::MetricMeasureSpace;

    use super::*;

    fn identity(h: f64) -> SampledMapping {
        let s = Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], h).unwrap());
        SampledMapping::from_fn(s.clone(), s, true, |x| x.to_vec()).unwrap()
    }

    #[test]
    fn identity_lip_is_one() {
        let f = identity(0.02);
        let s = RadiusSchedule::geometric(0.16, 2.0, 3).unwrap();
        let field =
            asymptotic_field(&f, FieldKind::LipUpper, &s, &FieldParams::default(), &Selection::Interior)
                .unwrap();
        assert!(!field.is_empty());
        for &v in &field.values {
            assert!((v - 1.0).abs() <= 0.1, "{v}");
        }
        assert_eq!(field.diverging_count(), 0);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in FieldKind::ALL {
            assert_eq!(k.name().parse::<FieldKind>().unwrap(), k);
        }
        assert!("LIP".parse::<FieldKind>().is_err());
    }

    #[test]
    fn weighted_kinds_need_their_inputs() {
        let f = identity(0.05);
        let s = RadiusSchedule::geometric(0.2, 2.0, 2).unwrap();
        let none = FieldParams::default();
        assert!(matches!(
            asymptotic_field(&f, FieldKind::WeightedLip, &s, &none, &Selection::Interior),
            Err(MappingError::MissingWeight(_))
        ));
        let small = FieldParams::weighted(RadonWeight::base(), 0.5);
        assert!(asymptotic_field(&f, FieldKind::WeightedLip, &s, &small, &Selection::Interior).is_err());
        let no_q = FieldParams::weighted(RadonWeight::base(), 2.0);
        assert!(
            asymptotic_field(&f, FieldKind::WeightedDistortion, &s, &no_q, &Selection::Interior)
                .is_err()
        );
        let q1 = no_q.clone().with_exponent(1.0);
        assert!(
            asymptotic_field(&f, FieldKind::WeightedDistortion, &s, &q1, &Selection::Interior)
                .is_err()
        );
    }

    #[test]
    fn below_floor_is_refused() {
        let f = identity(0.05);
        let s = RadiusSchedule::geometric(0.2, 4.0, 3).unwrap();
        assert!(
            asymptotic_field(&f, FieldKind::LipUpper, &s, &FieldParams::default(), &Selection::All)
                .is_err()
        );
    }

    #[test]
    fn growth_exponent_of_power_law() {
        let r = [0.4, 0.2, 0.1, 0.05];
        let q: Vec<f64> = r.iter().map(|x: &f64| x.powf(-0.75)).collect();
        assert!((growth_exponent(&r, &q) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn mass_nearby_is_not_divergence() {
        let h = 0.01;
        let f = identity(h);
        let mut w = RadonWeight::base();
        for i in 0..f.domain().len() {
            if (f.domain().point(i)[1] - 0.505).abs() < h / 4.0 {
                w.add_mass(i, h);
            }
        }
        let s = RadiusSchedule::geometric(0.08, 2.0, 3).unwrap();
        let params = FieldParams::weighted(w, 2.0);
        let field =
            asymptotic_field(&f, FieldKind::WeightedLip, &s, &params, &Selection::Interior).unwrap();
        // some points recover from the suppressed density within the tail
        let recovering = (0..field.len())
            .filter(|&k| field.growth[k] >= DIVERGENCE_EXPONENT && field.quotients_at(k)[2] > field.quotients_at(k)[1])
            .count();
        assert!(recovering > 0);
        assert_eq!(field.diverging_count(), 0);

        let domain = f.domain_arc().clone();
        let jump = SampledMapping::from_fn(domain.clone(), domain, false, |x| {
            vec![x[0], x[1] + if x[1] > 0.5 { 0.3 } else { 0.0 }]
        })
        .unwrap();
        let field =
            asymptotic_field(&jump, FieldKind::WeightedLip, &s, &FieldParams::weighted(RadonWeight::base(), 2.0), &Selection::Interior)
                .unwrap();
        assert!(field.diverging_count() > 0);
    }

    #[test]
    fn identity_has_no_jumps() {
        let f = identity(0.01);
        let s = RadiusSchedule::geometric(0.16, 2.0, 4).unwrap();
        assert!(discontinuity_scan(&f, &s, &Selection::Interior).unwrap().is_empty());
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        assert_eq!(fmt_float(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
