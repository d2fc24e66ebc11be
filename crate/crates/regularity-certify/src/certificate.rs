use std::fmt::Write as _;

use curves_modulus::gamma_a_family;
use mapping_numbers::{FieldParams, RadonWeight, SampledMapping};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use space_core::{inner_region, MetricMeasureSpace};

use crate::chain::{bv_chain, distortion_chain, lip_chain, ChainContext, Link};
use crate::constants::Constants;
use crate::critical::{critical_branch, CriticalReport};
use crate::gradient::{assemble_gradients, distortion_exponent, GradientSequence};
use crate::nullset::{null_set_check, NullSetReport};
use crate::partition::{classify_points, ClassifyParams, HField, Part, Partition, Theorem};
use crate::probe::{curvewise_verification, equi_integrability_probe, EquiReport};
use crate::volume::{image_volume, ImageVolume};
use crate::{num, CertifyError, Result};

fn infinity() -> f64 {
    f64::INFINITY
}

/// Everything a certificate run depends on besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub theorem: Theorem,
    /// energy exponent; forced to 1 for `bv` and to `Q` for `sobolev-critical`
    pub p: f64,
    pub q: f64,
    /// ball enlargement `M`
    pub spread: f64,
    pub epsilon: f64,
    pub levels: Vec<usize>,
    /// radius of the image balls; a quarter of the domain diameter if unset
    pub beta: Option<f64>,
    pub doubling: Option<f64>,
    pub regularity: Option<f64>,
    #[serde(with = "num", default = "infinity")]
    pub lip_cutoff: f64,
    #[serde(with = "num", default = "infinity")]
    pub distortion_cutoff: f64,
    pub stride: usize,
    pub h: HField,
    /// content threshold below which the exceptional set is tested further
    pub null_threshold: f64,
    pub curves: usize,
    pub seed: u64,
    pub mass_fractions: Vec<f64>,
    pub sweep: Vec<f64>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            theorem: Theorem::Bv,
            p: 1.0,
            q: 2.0,
            spread: 1.0,
            epsilon: 1.0,
            levels: vec![8, 16, 32],
            beta: None,
            doubling: None,
            regularity: None,
            lip_cutoff: f64::INFINITY,
            distortion_cutoff: f64::INFINITY,
            stride: 1,
            h: HField::Constant(1.0),
            null_threshold: 0.05,
            curves: 40,
            seed: 0,
            mass_fractions: vec![0.1, 0.03, 0.01, 0.003],
            sweep: vec![1.0, 0.1, 0.01],
        }
    }
}

impl CertifyConfig {
    /// The exponent the theorem actually uses.
    pub fn effective_p(&self) -> f64 {
        match self.theorem {
            Theorem::Bv => 1.0,
            Theorem::SobolevCritical => self.q,
            _ => self.p,
        }
    }

    pub fn classify_params(&self, weight: &RadonWeight) -> ClassifyParams {
        ClassifyParams {
            theorem: self.theorem,
            weight: weight.clone(),
            spread: self.spread,
            q: self.q,
            p: self.effective_p(),
            epsilon: self.epsilon,
            levels: self.levels.clone(),
            lip_cutoff: self.lip_cutoff,
            distortion_cutoff: self.distortion_cutoff,
            stride: self.stride,
            h: self.h.clone(),
        }
    }
}

/// The asserted right-hand side and the components it is computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "kebab-case")]
pub enum Bound {
    /// `C eps^(-1/(Q-1)) int h dkappa + C eps (kappa(Omega) + nu(V))`
    Bv {
        #[serde(with = "num")]
        constant: f64,
        epsilon: f64,
        q: f64,
        h_weight: f64,
        weight_total: f64,
        image_volume: f64,
        #[serde(with = "num")]
        value: f64,
    },
    /// `C^p (int (h a)^p + (2 eps)^p int a^p)`
    SobolevLip {
        #[serde(with = "num")]
        constant: f64,
        epsilon: f64,
        p: f64,
        h_a_power: f64,
        a_power: f64,
        #[serde(with = "num")]
        value: f64,
    },
    /// `C nu(V) + C (int h a^s + 2 eps int a^s)`, `s = p(Q-1)/(Q-p)`
    SobolevDistortion {
        #[serde(with = "num")]
        constant: f64,
        epsilon: f64,
        p: f64,
        q: f64,
        image_volume: f64,
        h_a_s: f64,
        a_s: f64,
        #[serde(with = "num")]
        value: f64,
    },
    /// `C nu(V) |a|^(Q-1) |H^(a,M)|^Q`
    SobolevCritical {
        #[serde(with = "num")]
        constant: f64,
        q: f64,
        image_volume: f64,
        #[serde(with = "num")]
        a_sup: f64,
        #[serde(with = "num")]
        distortion_sup: f64,
        #[serde(with = "num")]
        value: f64,
    },
}

impl Bound {
    /// The bound formula at `epsilon` with the stored components.
    pub fn at_epsilon(&self, epsilon: f64) -> f64 {
        match *self {
            Bound::Bv {
                constant,
                q,
                h_weight,
                weight_total,
                image_volume,
                ..
            } => {
                constant * epsilon.powf(-1.0 / (q - 1.0)) * h_weight
                    + constant * epsilon * (weight_total + image_volume)
            }
            Bound::SobolevLip {
                constant,
                p,
                h_a_power,
                a_power,
                ..
            } => constant.powf(p) * (h_a_power + (2.0 * epsilon).powf(p) * a_power),
            Bound::SobolevDistortion {
                constant,
                image_volume,
                h_a_s,
                a_s,
                ..
            } => constant * image_volume + constant * (h_a_s + 2.0 * epsilon * a_s),
            Bound::SobolevCritical {
                constant,
                q,
                image_volume,
                a_sup,
                distortion_sup,
                ..
            } => constant * image_volume * a_sup.powf(q - 1.0) * distortion_sup.powf(q),
        }
    }

    pub fn epsilon(&self) -> f64 {
        match *self {
            Bound::Bv { epsilon, .. }
            | Bound::SobolevLip { epsilon, .. }
            | Bound::SobolevDistortion { epsilon, .. } => epsilon,
            Bound::SobolevCritical { .. } => 1.0,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Bound::Bv { value, .. }
            | Bound::SobolevLip { value, .. }
            | Bound::SobolevDistortion { value, .. }
            | Bound::SobolevCritical { value, .. } => value,
        }
    }

    pub fn constant(&self) -> f64 {
        match *self {
            Bound::Bv { constant, .. }
            | Bound::SobolevLip { constant, .. }
            | Bound::SobolevDistortion { constant, .. }
            | Bound::SobolevCritical { constant, .. } => constant,
        }
    }

    /// Re-evaluates the formula on the stored components.
    pub fn recompute(&self) -> f64 {
        self.at_epsilon(self.epsilon())
    }

    fn with_value(mut self) -> Self {
        let v = self.recompute();
        match &mut self {
            Bound::Bv { value, .. }
            | Bound::SobolevLip { value, .. }
            | Bound::SobolevDistortion { value, .. }
            | Bound::SobolevCritical { value, .. } => *value = v,
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRecord {
    pub doubling_supplied: Option<f64>,
    pub doubling_measured: f64,
    pub doubling: f64,
    pub regularity_supplied: Option<f64>,
    pub regularity_measured: f64,
    pub regularity: f64,
    pub q: f64,
    pub spread: f64,
    pub overlap_exponent: f64,
    /// colour classes `C_d^ceil(log2(18 M))`
    pub overlap: f64,
    /// the theorem's constant
    #[serde(with = "num")]
    pub theorem_constant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: usize,
    pub a: usize,
    pub d: usize,
    pub exceptional: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub evaluated: usize,
    pub a: usize,
    pub d: usize,
    pub n: usize,
    pub nested: bool,
    pub h_violations: usize,
    /// first few points where `h` fails to dominate
    pub h_violation_sample: Vec<usize>,
    pub per_level: Vec<LevelCount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSummary {
    pub level: usize,
    pub part: Part,
    pub balls: usize,
    pub covered: usize,
    pub overlap: usize,
    pub overlap_double: usize,
    pub target: f64,
    pub within_target: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub level: usize,
    /// `integral g_j`
    pub energy: f64,
    /// `integral g_j^p`
    pub energy_power: f64,
    pub full_energy: f64,
    pub full_energy_power: f64,
    pub window_energy: f64,
    pub links: Vec<Link>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    #[serde(with = "num")]
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub curves: usize,
    pub min_length: f64,
    pub seed: u64,
    pub exempt: usize,
    pub pass_fraction: f64,
    /// same check against the sequence that includes the exceptional balls
    pub full_pass_fraction: f64,
    pub failing: Vec<usize>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub reasons: Vec<String>,
    /// observations that do not affect the verdict
    pub flags: Vec<String>,
}

/// Replayable record of one certificate run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub theorem: Theorem,
    pub digest: String,
    pub config: CertifyConfig,
    pub constants: ConstantsRecord,
    pub partition: PartitionSummary,
    pub covers: Vec<CoverSummary>,
    pub energies: Vec<EnergyRow>,
    pub bound: Bound,
    pub sweep: Vec<SweepPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_volume: Option<ImageVolume>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalReport>,
    pub equi: EquiReport,
    pub full_equi: EquiReport,
    pub curves: CurveSummary,
    pub null_set: NullSetReport,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn recompute_bound(&self) -> f64 {
        self.bound.recompute()
    }

    /// The energy the bound is compared with: `max_j integral g_j^p`, or the
    /// `lip` energy in the critical branch.
    pub fn certified_energy(&self) -> f64 {
        match (&self.critical, self.theorem) {
            (Some(c), _) => c.lip_energy,
            (None, Theorem::Bv) => self.energies.iter().map(|e| e.energy).fold(0.0, f64::max),
            _ => self
                .energies
                .iter()
                .map(|e| e.energy_power)
                .fold(0.0, f64::max),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Human-readable rendering.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "theorem      {}", self.theorem);
        let _ = writeln!(s, "digest       {}", self.digest);
        let p = &self.partition;
        let _ = writeln!(
            s,
            "partition    {} points: A {}, D {}, N {}",
            p.evaluated, p.a, p.d, p.n
        );
        let c = &self.constants;
        let _ = writeln!(
            s,
            "constants    C_d {:.4} C_Omega {:.4} C_M {:.4e} C {:.4e}",
            c.doubling, c.regularity, c.overlap, c.theorem_constant
        );
        let _ = writeln!(s, "level        energy         energy^p       full           window");
        for e in &self.energies {
            let _ = writeln!(
                s,
                "{:<12} {:<14.6e} {:<14.6e} {:<14.6e} {:.6e}",
                e.level, e.energy, e.energy_power, e.full_energy, e.window_energy
            );
        }
        let _ = writeln!(
            s,
            "bound        {:.6e} against {:.6e}",
            self.bound.value(),
            self.certified_energy()
        );
        for w in &self.sweep {
            let _ = writeln!(s, "  eps {:<8} {:.6e}", w.epsilon, w.value);
        }
        let _ = writeln!(
            s,
            "curves       {} sampled, {} exempt, pass {:.3}",
            self.curves.curves, self.curves.exempt, self.curves.pass_fraction
        );
        let _ = writeln!(s, "null set     {} ({})", self.null_set.holds, self.null_set.note);
        let _ = writeln!(
            s,
            "verdict      {}",
            if self.verdict.pass { "PASS" } else { "FAIL" }
        );
        for r in &self.verdict.reasons {
            let _ = writeln!(s, "  - {r}");
        }
        for f in &self.verdict.flags {
            let _ = writeln!(s, "  * {f}");
        }
        s
    }
}

fn hash_floats(h: &mut Sha256, v: &[f64]) {
    for x in v {
        h.update(x.to_le_bytes());
    }
}

fn hash_space(h: &mut Sha256, s: &MetricMeasureSpace) {
    h.update((s.dim() as u64).to_le_bytes());
    hash_floats(h, s.coords());
    hash_floats(h, s.weights());
}

/// SHA-256 of the spaces, mapping values, weight and configuration.
pub fn input_digest(
    mapping: &SampledMapping,
    weight: &RadonWeight,
    config: &CertifyConfig,
) -> Result<String> {
    let mut h = Sha256::new();
    hash_space(&mut h, mapping.domain());
    hash_space(&mut h, mapping.target());
    hash_floats(&mut h, mapping.values());
    h.update(serde_json::to_vec(weight)?);
    h.update(serde_json::to_vec(config)?);
    Ok(format!("{:x}", h.finalize()))
}

fn measured_constants(seq: &GradientSequence, q: f64) -> (f64, f64) {
    let mut doubling = 1.0f64;
    let mut regularity = 1.0f64;
    for lv in &seq.levels {
        let r = lv.radius();
        for b in lv.theorem_balls() {
            if b.mass > 0.0 {
                doubling = doubling.max(b.mass_double / b.mass);
                let ahlfors = b.mass / r.powf(q);
                regularity = regularity.max(ahlfors).max(ahlfors.recip());
            }
            if b.part == Part::D && b.image_ball > 0.0 {
                regularity = regularity.max(b.lower.powf(q) / b.image_ball);
            }
        }
    }
    (doubling, regularity)
}

fn exempt_mask(mapping: &SampledMapping, partition: &Partition, radius: f64, uses: &[Part]) -> Vec<bool> {
    let domain = mapping.domain();
    let j_max = *partition.levels.last().unwrap();
    let mut mask = vec![false; domain.len()];
    for (k, &x) in partition.points.iter().enumerate() {
        let controlled = uses.contains(&partition.part[k])
            && partition.level[k].map_or(false, |l| l <= j_max);
        if !controlled {
            domain.for_each_within(domain.point(x), radius, false, |z, _| mask[z] = true);
        }
    }
    mask
}

/// Runs the whole pipeline: partition, covers, gradient sequence, proof
/// chains, bound, probes, null-set hypothesis and verdict.
pub fn certify(
    mapping: &SampledMapping,
    weight: &RadonWeight,
    config: &CertifyConfig,
) -> Result<Certificate> {
    let domain = mapping.domain();
    let digest = input_digest(mapping, weight, config)?;
    let params = config.classify_params(weight);
    let theorem = config.theorem;
    let p = params.p;
    let q = config.q;
    let e = config.epsilon;
    let partition = classify_points(mapping, &params)?;
    let mut seq = assemble_gradients(mapping, &partition, &params)?;

    let (doubling_measured, regularity_measured) = measured_constants(&seq, q);
    let constants = Constants::new(
        config.doubling.unwrap_or(1.0).max(doubling_measured),
        config.regularity.unwrap_or(1.0).max(regularity_measured),
        q,
        config.spread,
    )?;
    let overlap = constants.overlap();
    for lv in &mut seq.levels {
        for c in &mut lv.covers {
            c.overlap_target = overlap;
            c.within_target = (c.overlap.max(c.overlap_double) as f64) <= overlap;
        }
    }

    let beta = config.beta.unwrap_or(domain.diameter() / 4.0);
    let d_points = partition.points_of(Part::D);
    let volume = if theorem.uses_distortion() && mapping.is_injective() {
        Some(image_volume(mapping, &d_points, beta)?)
    } else {
        None
    };
    let nu = volume.as_ref().map_or(0.0, |v| v.volume);

    let budgets = &seq.budgets;
    let mu = domain.weights();
    let hval = |i: usize| config.h.at(i);
    let n = domain.len();
    let mut critical = None;
    let bound = match theorem {
        Theorem::Bv => Bound::Bv {
            constant: constants.bv(),
            epsilon: e,
            q,
            h_weight: (0..n).map(|i| hval(i) * budgets.weight[i]).sum(),
            weight_total: budgets.weight.iter().sum(),
            image_volume: nu,
            value: 0.0,
        },
        Theorem::SobolevLip => Bound::SobolevLip {
            constant: constants.sobolev_lip(p),
            epsilon: e,
            p,
            h_a_power: (0..n)
                .map(|i| (hval(i) * budgets.density[i]).powf(p) * mu[i])
                .sum(),
            a_power: (0..n).map(|i| budgets.density[i].powf(p) * mu[i]).sum(),
            value: 0.0,
        },
        Theorem::SobolevDistortion => {
            let s = distortion_exponent(p, q);
            Bound::SobolevDistortion {
                constant: constants.sobolev_distortion(p),
                epsilon: e,
                p,
                q,
                image_volume: nu,
                h_a_s: (0..n)
                    .map(|i| hval(i) * budgets.density[i].powf(s) * mu[i])
                    .sum(),
                a_s: (0..n).map(|i| budgets.density[i].powf(s) * mu[i]).sum(),
                value: 0.0,
            }
        }
        Theorem::SobolevCritical => {
            let fp = FieldParams::weighted(weight.clone(), config.spread).with_exponent(q);
            let report = critical_branch(mapping, &partition, &fp, &constants, nu)?;
            let b = Bound::SobolevCritical {
                constant: report.constant,
                q,
                image_volume: nu,
                a_sup: report.a_sup,
                distortion_sup: report.distortion_sup,
                value: 0.0,
            };
            critical = Some(report);
            b
        }
    }
    .with_value();
    if let Some(c) = &critical {
        debug_assert_eq!(c.bound, bound.value());
    }

    let ctx = ChainContext {
        constants,
        epsilon: e,
        p,
        linear_total: budgets.linear_total(),
        power_total: budgets.power_total(),
        image_volume: nu,
        bound: bound.value(),
    };
    let energies: Vec<EnergyRow> = seq
        .levels
        .iter()
        .map(|lv| EnergyRow {
            level: lv.level,
            energy: lv.energy,
            energy_power: lv.energy_power,
            full_energy: lv.full_energy,
            full_energy_power: lv.full_energy_power,
            window_energy: lv.window_energy,
            links: match theorem {
                Theorem::Bv => bv_chain(lv, &ctx),
                Theorem::SobolevLip => lip_chain(lv, &ctx),
                Theorem::SobolevDistortion => distortion_chain(lv, &ctx),
                Theorem::SobolevCritical => Vec::new(),
            },
        })
        .collect();
    let covers: Vec<CoverSummary> = seq
        .levels
        .iter()
        .flat_map(|lv| lv.covers.iter())
        .map(|c| CoverSummary {
            level: c.level,
            part: c.part,
            balls: c.centers.len(),
            covered: c.covered,
            overlap: c.overlap,
            overlap_double: c.overlap_double,
            target: c.overlap_target,
            within_target: c.within_target,
        })
        .collect();

    let sweep: Vec<SweepPoint> = config
        .sweep
        .iter()
        .map(|&eps| SweepPoint {
            epsilon: eps,
            value: bound.at_epsilon(eps),
        })
        .collect();

    let theorem_g: Vec<&[f64]> = seq.levels.iter().map(|l| l.density.as_slice()).collect();
    let full_g: Vec<&[f64]> = seq.levels.iter().map(|l| l.full_density.as_slice()).collect();
    let level_ids: Vec<usize> = seq.levels.iter().map(|l| l.level).collect();
    let equi = equi_integrability_probe(domain, &level_ids, &theorem_g, &config.mass_fractions);
    let full_equi = equi_integrability_probe(domain, &level_ids, &full_g, &config.mass_fractions);

    let j_min = partition.levels[0];
    let j_max = *partition.levels.last().unwrap();
    let min_length = 1.0 / j_min as f64;
    let uses: &[Part] = match theorem {
        Theorem::Bv => &[Part::A, Part::D],
        Theorem::SobolevLip => &[Part::A],
        _ => &[Part::D],
    };
    let mut curve_summary = CurveSummary {
        curves: 0,
        min_length,
        seed: config.seed,
        exempt: 0,
        pass_fraction: 1.0,
        full_pass_fraction: 1.0,
        failing: Vec::new(),
        note: String::new(),
    };
    if config.curves > 0 && theorem != Theorem::SobolevCritical {
        let set = inner_region(domain, seq.window + 1.5 * min_length)?.members;
        let family = if set.is_empty() {
            Err("no room for curves inside the window".to_string())
        } else {
            gamma_a_family(domain, &set, config.curves, min_length, config.seed)
                .map_err(|e| e.to_string())
        };
        match family {
            Ok(family) => {
                let mask = exempt_mask(mapping, &partition, 2.0 / j_max as f64, uses);
                let th = curvewise_verification(mapping, &theorem_g, &family, &mask, 2);
                let full = curvewise_verification(mapping, &full_g, &family, &mask, 2);
                curve_summary.curves = family.len();
                curve_summary.exempt = th.exempt;
                curve_summary.pass_fraction = th.pass_fraction;
                curve_summary.full_pass_fraction = full.pass_fraction;
                curve_summary.failing = th.failing();
            }
            Err(msg) => curve_summary.note = msg,
        }
    }

    let null_set = null_set_check(
        domain,
        &partition.points_of(Part::N),
        p,
        config.null_threshold,
        config.seed,
    )?;

    let partition_summary = PartitionSummary {
        evaluated: partition.len(),
        a: partition.count(Part::A),
        d: partition.count(Part::D),
        n: partition.count(Part::N),
        nested: partition.nested,
        h_violations: partition.h_violations.len(),
        h_violation_sample: partition.h_violations.iter().take(10).copied().collect(),
        per_level: partition
            .levels
            .iter()
            .map(|&j| LevelCount {
                level: j,
                a: partition.level_set(j, Part::A).len(),
                d: partition.level_set(j, Part::D).len(),
                exceptional: partition.exceptional_set(j).len(),
            })
            .collect(),
    };

    let mut reasons = Vec::new();
    let mut flags = Vec::new();
    let certified = match (&critical, theorem) {
        (Some(c), _) => c.lip_energy,
        (None, Theorem::Bv) => seq.max_energy(),
        _ => seq.max_energy_power(),
    };
    if !(certified <= bound.value()) {
        reasons.push(format!(
            "energy {certified:.6e} exceeds the bound {:.6e}",
            bound.value()
        ));
    }
    for row in &energies {
        for l in row.links.iter().filter(|l| !l.holds) {
            reasons.push(format!(
                "level {}: step {} fails ({} offending balls, {:.6e} > {:.6e})",
                row.level, l.step, l.violations, l.lhs, l.rhs
            ));
        }
    }
    if let Some(c) = &critical {
        if !c.distortion_sup.is_finite() {
            reasons.push("weighted distortion is unbounded on the samples".into());
        }
        if !c.comparison_holds {
            reasons.push(format!(
                "sup H {:.6e} exceeds |a|^((Q-1)/Q) sup H^(a,M) = {:.6e}",
                c.plain_distortion_sup, c.comparison_bound
            ));
        }
    }
    if !partition.h_violations.is_empty() {
        reasons.push(format!(
            "h fails to dominate the field at {} points",
            partition.h_violations.len()
        ));
    }
    if !partition.nested {
        reasons.push("level sets are not nested".into());
    }
    if !null_set.holds {
        reasons.push(format!("exceptional set: {}", null_set.note));
    }
    if curve_summary.pass_fraction < 1.0 {
        reasons.push(format!(
            "{} curves violate the endpoint inequality",
            curve_summary.failing.len()
        ));
    }
    if covers.iter().any(|c| !c.within_target && c.part != Part::N) {
        flags.push("a cover exceeds the overlap target".into());
    }
    if constants.doubling > config.doubling.unwrap_or(f64::INFINITY) {
        flags.push("measured doubling constant exceeds the supplied one".into());
    }
    if constants.regularity > config.regularity.unwrap_or(f64::INFINITY) {
        flags.push("measured regularity constant exceeds the supplied one".into());
    }
    if !equi.decays {
        flags.push("the gradient sequence concentrates on small sets".into());
    }
    if !curve_summary.note.is_empty() {
        flags.push(curve_summary.note.clone());
    }

    let constants_record = ConstantsRecord {
        doubling_supplied: config.doubling,
        doubling_measured,
        doubling: constants.doubling,
        regularity_supplied: config.regularity,
        regularity_measured,
        regularity: constants.regularity,
        q,
        spread: config.spread,
        overlap_exponent: constants.overlap_exponent(),
        overlap,
        theorem_constant: bound.constant(),
    };
    if partition.is_empty() {
        return Err(CertifyError::InvalidParameter(
            "no evaluated points; the levels leave no inner region".into(),
        ));
    }
    Ok(Certificate {
        theorem,
        digest,
        config: config.clone(),
        constants: constants_record,
        partition: partition_summary,
        covers,
        energies,
        bound,
        sweep,
        image_volume: volume,
        critical,
        equi,
        full_equi,
        curves: curve_summary,
        null_set,
        verdict: Verdict {
            pass: reasons.is_empty(),
            reasons,
            flags,
        },
    })
}
