use std::fmt;
use std::str::FromStr;

use mapping_numbers::{
    asymptotic_fields, FieldKind, FieldParams, PointwiseField, RadiusSchedule, RadonWeight,
    SampledMapping, Selection,
};
use serde::{Deserialize, Serialize};
use space_core::{inner_region, MetricMeasureSpace};

use crate::constants::sobolev_conjugate;
use crate::{CertifyError, Result};

/// Which energy estimate a run certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// total variation through both the Lipschitz and the distortion sums
    Bv,
    /// `p`-energy through the Lipschitz sum
    SobolevLip,
    /// `p`-energy through the distortion sum, `1 <= p < Q`
    SobolevDistortion,
    /// `Q`-energy of the pointwise Lipschitz number
    SobolevCritical,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::Bv,
        Theorem::SobolevLip,
        Theorem::SobolevDistortion,
        Theorem::SobolevCritical,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::Bv => "bv",
            Theorem::SobolevLip => "sobolev-lip",
            Theorem::SobolevDistortion => "sobolev-distortion",
            Theorem::SobolevCritical => "sobolev-critical",
        }
    }

    pub fn uses_lip(self) -> bool {
        matches!(self, Theorem::Bv | Theorem::SobolevLip)
    }

    pub fn uses_distortion(self) -> bool {
        !matches!(self, Theorem::SobolevLip)
    }

    pub fn needs_injective(self) -> bool {
        matches!(self, Theorem::SobolevDistortion | Theorem::SobolevCritical)
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Theorem {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| CertifyError::InvalidParameter(format!("unknown theorem {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    /// Lipschitz-controlled
    A,
    /// distortion-controlled
    D,
    /// exceptional
    N,
}

/// The dominating function `h` of the energy bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HField {
    Constant(f64),
    /// one value per domain point
    Values(Vec<f64>),
}

impl HField {
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        match self {
            HField::Constant(c) => *c,
            HField::Values(v) => v[i],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |v: f64| !(v >= 0.0) || !v.is_finite();
        match self {
            HField::Constant(c) if bad(*c) => {
                Err(CertifyError::InvalidParameter(format!("h = {c}")))
            }
            HField::Values(v) if v.len() != n => Err(CertifyError::HLength {
                expected: n,
                found: v.len(),
            }),
            HField::Values(v) => match v.iter().position(|&x| bad(x)) {
                Some(i) => Err(CertifyError::InvalidParameter(format!(
                    "h = {} at point {i}",
                    v[i]
                ))),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }

    /// Smallest value on the open ball `B(x, r)`.
    pub fn min_on_ball(&self, space: &MetricMeasureSpace, x: usize, r: f64) -> f64 {
        match self {
            HField::Constant(c) => *c,
            HField::Values(v) => {
                let mut m = v[x];
                space.for_each_within(space.point(x), r, false, |j, _| m = m.min(v[j]));
                m
            }
        }
    }
}

/// Inputs of [`classify_points`].
#[derive(Clone, Debug)]
pub struct ClassifyParams {
    pub theorem: Theorem,
    /// `kappa` for the BV estimate, `a * mu` for the Sobolev estimates
    pub weight: RadonWeight,
    /// ball enlargement `M >= 1`
    pub spread: f64,
    pub q: f64,
    pub p: f64,
    /// `0 < epsilon <= 1`
    pub epsilon: f64,
    /// scales `j`, radius `1/j`
    pub levels: Vec<usize>,
    pub lip_cutoff: f64,
    pub distortion_cutoff: f64,
    /// evaluate every `stride`-th lattice point per axis
    pub stride: usize,
    pub h: HField,
}

impl ClassifyParams {
    pub fn validate(&self, domain: &MetricMeasureSpace) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(CertifyError::InvalidParameter(format!("{what} = {v}")))
        };
        if !(self.spread >= 1.0) || !self.spread.is_finite() {
            return bad("M", self.spread);
        }
        if !(self.q > 1.0) || !self.q.is_finite() {
            return bad("Q", self.q);
        }
        if !(self.p >= 1.0) || self.p > self.q {
            return bad("p", self.p);
        }
        if self.theorem == Theorem::SobolevDistortion && self.p >= self.q {
            return Err(CertifyError::InvalidParameter(format!(
                "p = {} is not below Q = {}; use {}",
                self.p,
                self.q,
                Theorem::SobolevCritical
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad("epsilon", self.epsilon);
        }
        if self.stride == 0 {
            return bad("stride", 0.0);
        }
        if !(self.lip_cutoff > 0.0) || !(self.distortion_cutoff > 0.0) {
            return Err(CertifyError::InvalidParameter("cutoffs must be positive".into()));
        }
        if self.theorem != Theorem::Bv && !self.weight.singular.is_empty() {
            return Err(CertifyError::InvalidParameter(
                "the Sobolev estimates take a density, not point masses".into(),
            ));
        }
        self.h.validate(domain.len())
    }

    /// `(sup slack, h slack, power of the field compared with h)` for a part.
    pub fn slacks(&self, part: Part) -> (f64, f64, f64) {
        let e = self.epsilon;
        let conj = self.q / (self.q - 1.0);
        match (self.theorem, part) {
            (Theorem::Bv, Part::A) => (e.powf(conj), e.powf(conj), 1.0),
            (Theorem::Bv, _) => (e, e.powf(conj), conj),
            (Theorem::SobolevLip, _) => (e, e, 1.0),
            (Theorem::SobolevDistortion, _) => (e, e, sobolev_conjugate(self.p, self.q)),
            (Theorem::SobolevCritical, _) => (e, f64::INFINITY, 1.0),
        }
    }

    pub fn sorted_levels(&self) -> Result<Vec<usize>> {
        let mut l = self.levels.clone();
        l.sort_unstable();
        l.dedup();
        if l.is_empty() || l[0] == 0 {
            return Err(CertifyError::InvalidParameter(format!("levels {:?}", self.levels)));
        }
        Ok(l)
    }
}

/// Radii `1/j` of every level together with the halvings of `1/j_min` down
/// to `floor`; the last two radii form the tail.
pub fn level_schedule(levels: &[usize], floor: f64) -> Result<RadiusSchedule> {
    let j_max = *levels.iter().max().ok_or(CertifyError::MissingLevel(0))?;
    let j_min = *levels.iter().min().unwrap();
    if 1.0 / (j_max as f64) < floor * (1.0 - 1e-9) {
        return Err(CertifyError::InvalidParameter(format!(
            "level {j_max} has radius below the trusted floor {floor}"
        )));
    }
    let mut radii: Vec<f64> = levels.iter().map(|&j| 1.0 / j as f64).collect();
    let mut r = 1.0 / j_min as f64;
    while r >= floor * (1.0 - 1e-9) {
        radii.push(r);
        r /= 2.0;
    }
    radii.sort_by(|a, b| b.total_cmp(a));
    radii.dedup_by(|b, a| (*a - *b).abs() <= 1e-9 * *a);
    if radii.len() < 2 {
        return Err(CertifyError::InvalidParameter(format!(
            "levels {levels:?} leave fewer than two radii above the trusted floor {floor}"
        )));
    }
    Ok(RadiusSchedule::new(radii, 2)?)
}

/// Disjoint split of the evaluated points with the first level each point
/// qualifies at.
#[derive(Clone, Debug)]
pub struct Partition {
    pub theorem: Theorem,
    pub levels: Vec<usize>,
    pub spread: f64,
    /// evaluated domain points, sorted
    pub points: Vec<usize>,
    pub part: Vec<Part>,
    /// smallest qualifying level
    pub level: Vec<Option<usize>>,
    /// controlling field value (infinite on `N`)
    pub value: Vec<f64>,
    /// distance to the complement of the region
    pub margin: Vec<f64>,
    /// qualification never lapses once reached
    pub nested: bool,
    /// points of `A` or `D` held back at the finest level only by `h`
    pub h_violations: Vec<usize>,
    pub schedule: RadiusSchedule,
    pub lip: Option<PointwiseField>,
    pub distortion: Option<PointwiseField>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn count(&self, part: Part) -> usize {
        self.part.iter().filter(|&&p| p == part).count()
    }

    pub fn points_of(&self, part: Part) -> Vec<usize> {
        self.points
            .iter()
            .zip(&self.part)
            .filter(|(_, &p)| p == part)
            .map(|(&i, _)| i)
            .collect()
    }

    /// Inner margin `(M+1)/j` of level `j`.
    pub fn level_margin(&self, j: usize) -> f64 {
        (self.spread + 1.0) / j as f64
    }

    /// Points of `part` qualified at level `j` (`A_j` or `D_j`).
    pub fn level_set(&self, j: usize, part: Part) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.part[k] == part && self.level[k].map_or(false, |l| l <= j))
            .map(|k| self.points[k])
            .collect()
    }

    /// Evaluated points of the level-`j` inner region outside `A_j` and `D_j`.
    pub fn exceptional_set(&self, j: usize) -> Vec<usize> {
        let m = self.level_margin(j);
        (0..self.len())
            .filter(|&k| self.margin[k] > m && self.level[k].map_or(true, |l| l > j))
            .map(|k| self.points[k])
            .collect()
    }

    pub fn position(&self, point: usize) -> Option<usize> {
        self.points.binary_search(&point).ok()
    }
}

fn lattice_filter(domain: &MetricMeasureSpace, points: Vec<usize>, stride: usize) -> Result<Vec<usize>> {
    if stride == 1 {
        return Ok(points);
    }
    let b = domain
        .bounds()
        .ok_or_else(|| CertifyError::InvalidParameter("a stride needs region bounds".into()))?;
    let h = domain.resolution();
    Ok(points
        .into_iter()
        .filter(|&i| {
            domain
                .point(i)
                .iter()
                .zip(&b.lo)
                .all(|(&x, &lo)| (((x - lo) / h).floor() as i64).rem_euclid(stride as i64) == 0)
        })
        .collect())
}

fn usable(field: &PointwiseField, pos: usize, cutoff: f64) -> bool {
    let v = field.values[pos];
    v.is_finite() && !field.diverging[pos] && v <= cutoff
}

/// Splits the evaluated points into `A`, `D` and `N` and finds for each
/// point of `A` or `D` the first level it qualifies at: inside the level's
/// inner region, with every quotient at radii up to `1/j` within the slack
/// of the field value, and with the field dominated by `h` on `B(x, M/j)`.
pub fn classify_points(mapping: &SampledMapping, params: &ClassifyParams) -> Result<Partition> {
    let domain = mapping.domain();
    params.validate(domain)?;
    let theorem = params.theorem;
    if theorem.needs_injective() && !mapping.is_injective() {
        return Err(CertifyError::NotInjective(theorem.id()));
    }
    let levels = params.sorted_levels()?;
    let j_max = *levels.last().unwrap();
    let spread = params.spread;
    let schedule = level_schedule(&levels, domain.trusted_floor())?;
    let region = inner_region(domain, (spread + 1.0) / j_max as f64)?;
    let points = lattice_filter(domain, region.members, params.stride)?;

    let with_lip = theorem.uses_lip();
    let with_dist = theorem.uses_distortion() && mapping.is_injective();
    let mut kinds = Vec::new();
    if with_lip {
        kinds.push(FieldKind::WeightedLip);
    }
    if with_dist {
        kinds.push(FieldKind::WeightedDistortion);
    }
    let fp = FieldParams::weighted(params.weight.clone(), spread).with_exponent(params.q);
    let mut fields = if points.is_empty() {
        Vec::new()
    } else {
        asymptotic_fields(mapping, &kinds, &schedule, &fp, &Selection::Points(points.clone()))?
    };
    let distortion = if with_dist && !fields.is_empty() { fields.pop() } else { None };
    let lip = if with_lip && !fields.is_empty() { fields.pop() } else { None };

    let b = domain.bounds().expect("inner region needs bounds");
    let metric = domain.metric();
    let radii = schedule.radii().to_vec();
    let n = points.len();
    let mut part = Vec::with_capacity(n);
    let mut value = Vec::with_capacity(n);
    let mut level = Vec::with_capacity(n);
    let mut margin = Vec::with_capacity(n);
    let mut nested = true;
    let mut h_violations = Vec::new();
    for (pos, &x) in points.iter().enumerate() {
        let m = metric.distance_to_box_complement(domain.point(x), &b.lo, &b.hi);
        margin.push(m);
        let (p, field) = match (&lip, &distortion) {
            (Some(f), _) if usable(f, pos, params.lip_cutoff) => (Part::A, f),
            (_, Some(f)) if usable(f, pos, params.distortion_cutoff) => (Part::D, f),
            _ => {
                part.push(Part::N);
                value.push(f64::INFINITY);
                level.push(None);
                continue;
            }
        };
        let v = field.values[pos];
        let quotients = field.quotients_at(pos);
        let (slack, h_slack, power) = params.slacks(p);
        let mut first = None;
        let mut blocked_by_h = false;
        for &j in &levels {
            let r = 1.0 / j as f64;
            let inside = m > (spread + 1.0) * r;
            let sup = radii
                .iter()
                .zip(quotients)
                .filter(|(&t, _)| t <= r * (1.0 + 1e-12))
                .map(|(_, &q)| q)
                .fold(0.0, f64::max);
            let controlled = sup <= v + slack;
            let dominated = h_slack.is_infinite()
                || v.powf(power) <= params.h.min_on_ball(domain, x, spread * r) + h_slack;
            let ok = inside && controlled && dominated;
            if ok && first.is_none() {
                first = Some(j);
            } else if !ok && first.is_some() {
                nested = false;
            }
            if j == j_max {
                blocked_by_h = inside && controlled && !dominated;
            }
        }
        if blocked_by_h {
            h_violations.push(x);
        }
        part.push(p);
        value.push(v);
        level.push(first);
    }
    Ok(Partition {
        theorem,
        levels,
        spread,
        points,
        part,
        level,
        value,
        margin,
        nested,
        h_violations,
        schedule,
        lip,
        distortion,
    })
}
