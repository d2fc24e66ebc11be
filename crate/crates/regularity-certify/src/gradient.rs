use mapping_numbers::SampledMapping;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::constants::sobolev_conjugate;
use crate::cover::{build_cover, CoverLevel};
use crate::partition::{ClassifyParams, Part, Partition, Theorem};
use crate::{num, CertifyError, Result};

/// Per-point integrands of the right-hand sides, so that every ball budget
/// and the global integral come from the same numbers.
#[derive(Clone, Debug)]
pub struct Budgets {
    /// BV: `(h + 2 eps') kappa`; Lipschitz route: `(h + 2 eps) a mu`;
    /// distortion route: `a^s (h + 2 eps) mu`
    pub linear: Vec<f64>,
    /// Lipschitz route: `(h + 2 eps)^p a^p mu`; distortion route: `a^s mu`
    pub power: Vec<f64>,
    /// weight masses: `kappa` or `a mu`
    pub weight: Vec<f64>,
    /// weight density `a` (one where the weight has none)
    pub density: Vec<f64>,
}

impl Budgets {
    pub fn new(domain: &MetricMeasureSpace, params: &ClassifyParams) -> Result<Self> {
        let weight = params.weight.masses(domain)?;
        let n = domain.len();
        let density = match &params.weight.density {
            Some(d) => d.clone(),
            None => vec![1.0; n],
        };
        let e = params.epsilon;
        let (p, q) = (params.p, params.q);
        let mu = domain.weights();
        let h = |i: usize| params.h.at(i);
        let (linear, power): (Vec<f64>, Vec<f64>) = match params.theorem {
            Theorem::Bv => {
                let e2 = 2.0 * e.powf(q / (q - 1.0));
                ((0..n).map(|i| (h(i) + e2) * weight[i]).collect(), vec![0.0; n])
            }
            Theorem::SobolevLip => (0..n)
                .map(|i| {
                    let v = (h(i) + 2.0 * e) * density[i];
                    (v * mu[i], v.powf(p) * mu[i])
                })
                .unzip(),
            Theorem::SobolevDistortion => {
                let s = distortion_exponent(p, q);
                (0..n)
                    .map(|i| {
                        let a = density[i].powf(s) * mu[i];
                        (a * (h(i) + 2.0 * e), a)
                    })
                    .unzip()
            }
            Theorem::SobolevCritical => (vec![0.0; n], vec![0.0; n]),
        };
        Ok(Self {
            linear,
            power,
            weight,
            density,
        })
    }

    pub fn linear_total(&self) -> f64 {
        self.linear.iter().sum()
    }

    pub fn power_total(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// `p(Q-1)/(Q-p)`, the power of `a` in the distortion-route bound.
pub(crate) fn distortion_exponent(p: f64, q: f64) -> f64 {
    sobolev_conjugate(p, q) * (q - 1.0) / q
}

/// Everything the proof chain reads off one cover ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallTerm {
    pub center: usize,
    pub part: Part,
    /// `L_f(x, 1/j)`
    #[serde(with = "num")]
    pub upper: f64,
    /// `l_f(x, 1/j)`, infinite when not needed
    #[serde(with = "num")]
    pub lower: f64,
    /// `mu(B)`
    pub mass: f64,
    /// `mu(2B)`
    pub mass_double: f64,
    /// `mu(MB)`
    pub mass_spread: f64,
    /// weight of `MB`
    pub weight_spread: f64,
    /// controlling field value at the centre
    #[serde(with = "num")]
    pub field: f64,
    /// target measure of `B(f(x), l)`
    pub image_ball: f64,
    /// smallest `h` on `MB`
    pub h_min: f64,
    /// linear budget integrated over `MB`
    pub budget_linear: f64,
    /// power budget integrated over `MB`
    pub budget_power: f64,
}

/// One level `j` of the gradient sequence.
#[derive(Clone, Debug)]
pub struct GradientLevel {
    pub level: usize,
    pub covers: Vec<CoverLevel>,
    pub balls: Vec<BallTerm>,
    /// `g_j` from the parts the theorem uses
    pub density: Vec<f64>,
    /// `g_j` with the exceptional balls added
    pub full_density: Vec<f64>,
    pub energy: f64,
    pub energy_power: f64,
    pub full_energy: f64,
    pub full_energy_power: f64,
    /// `2j sum L mu(2B)` over all balls centred in the window
    pub window_energy: f64,
}

impl GradientLevel {
    pub fn radius(&self) -> f64 {
        1.0 / self.level as f64
    }

    pub fn theorem_balls(&self) -> impl Iterator<Item = &BallTerm> {
        self.balls.iter().filter(|b| b.part != Part::N)
    }

    /// `2j sum L mu(2B)` over the theorem balls.
    pub fn recomputed_energy(&self) -> f64 {
        let j = self.level as f64;
        self.theorem_balls()
            .map(|b| 2.0 * j * b.upper * b.mass_double)
            .sum()
    }

    /// `sum j^p L^p mu(2B)` over the theorem balls of `part`.
    pub fn power_sum(&self, part: Part, p: f64) -> f64 {
        let j = self.level as f64;
        self.balls
            .iter()
            .filter(|b| b.part == part)
            .map(|b| (j * b.upper).powf(p) * b.mass_double)
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct GradientSequence {
    pub theorem: Theorem,
    pub p: f64,
    /// inner margin of the coarsest level
    pub window: f64,
    pub levels: Vec<GradientLevel>,
    pub budgets: Budgets,
}

impl GradientSequence {
    pub fn max_energy(&self) -> f64 {
        self.levels.iter().map(|l| l.energy).fold(0.0, f64::max)
    }

    pub fn max_energy_power(&self) -> f64 {
        self.levels.iter().map(|l| l.energy_power).fold(0.0, f64::max)
    }

    pub fn level(&self, j: usize) -> Option<&GradientLevel> {
        self.levels.iter().find(|l| l.level == j)
    }
}

fn ball_term(
    mapping: &SampledMapping,
    params: &ClassifyParams,
    budgets: &Budgets,
    center: usize,
    part: Part,
    field: f64,
    r: f64,
) -> Result<BallTerm> {
    let domain = mapping.domain();
    let mu = domain.weights();
    let m = params.spread;
    let fx = mapping.value(center);
    let target_metric = mapping.target().metric();
    let mut t = BallTerm {
        center,
        part,
        upper: 0.0,
        lower: f64::INFINITY,
        mass: 0.0,
        mass_double: 0.0,
        mass_spread: 0.0,
        weight_spread: 0.0,
        field,
        image_ball: 0.0,
        h_min: f64::INFINITY,
        budget_linear: 0.0,
        budget_power: 0.0,
    };
    domain.for_each_within(domain.point(center), m.max(2.0) * r, false, |z, d| {
        if d <= r {
            t.upper = t.upper.max(target_metric.distance(fx, mapping.value(z)));
        }
        if d < r {
            t.mass += mu[z];
        }
        if d < 2.0 * r {
            t.mass_double += mu[z];
        }
        if d < m * r {
            t.mass_spread += mu[z];
            t.weight_spread += budgets.weight[z];
            t.budget_linear += budgets.linear[z];
            t.budget_power += budgets.power[z];
            t.h_min = t.h_min.min(params.h.at(z));
        }
    });
    if part != Part::N && !(t.weight_spread > 0.0) {
        return Err(CertifyError::ZeroWeightBall {
            point: center,
            radius: m * r,
        });
    }
    if part == Part::D {
        t.lower = mapping.lower(center, r)?;
        if t.lower.is_finite() && t.lower > 0.0 {
            let target = mapping.target();
            t.image_ball = target.mass_within(fx, t.lower, false, target.weights());
        }
    }
    Ok(t)
}

/// Builds the covers of `A_j`, `D_j` and of the exceptional points at every
/// level, records the ball terms and sums `g_j = 2j sum L 1_{2B}`. The
/// overlap target of the covers is filled in later from the constants.
pub fn assemble_gradients(
    mapping: &SampledMapping,
    partition: &Partition,
    params: &ClassifyParams,
) -> Result<GradientSequence> {
    let domain = mapping.domain();
    let budgets = Budgets::new(domain, params)?;
    let theorem = params.theorem;
    let parts: &[Part] = match theorem {
        Theorem::Bv => &[Part::A, Part::D],
        Theorem::SobolevLip => &[Part::A],
        Theorem::SobolevDistortion | Theorem::SobolevCritical => &[Part::D],
    };
    let j_min = *partition.levels.first().ok_or(CertifyError::MissingLevel(0))?;
    let window = partition.level_margin(j_min);
    let bounds = domain.bounds().cloned();
    let margin_of = |x: usize| {
        bounds.as_ref().map_or(f64::INFINITY, |b| {
            domain
                .metric()
                .distance_to_box_complement(domain.point(x), &b.lo, &b.hi)
        })
    };
    let mu = domain.weights();
    let p = params.p;
    let mut levels = Vec::with_capacity(partition.levels.len());
    for &j in &partition.levels {
        let r = 1.0 / j as f64;
        let mut covers = Vec::new();
        for &part in parts {
            let set = partition.level_set(j, part);
            covers.push(build_cover(domain, &set, j, params.spread, part, f64::INFINITY)?);
        }
        let mut exceptional = partition.exceptional_set(j);
        // points of a part the theorem ignores count as exceptional
        for &unused in [Part::A, Part::D].iter().filter(|q| !parts.contains(q)) {
            exceptional.extend(partition.level_set(j, unused));
        }
        covers.push(build_cover(
            domain,
            &exceptional,
            j,
            params.spread,
            Part::N,
            f64::INFINITY,
        )?);
        let jobs: Vec<(usize, Part, f64)> = covers
            .iter()
            .flat_map(|c| {
                c.centers.iter().map(move |&x| {
                    let v = partition
                        .position(x)
                        .map_or(f64::INFINITY, |k| partition.value[k]);
                    (x, c.part, v)
                })
            })
            .collect();
        let balls: Vec<BallTerm> = jobs
            .par_iter()
            .map(|&(x, part, v)| ball_term(mapping, params, &budgets, x, part, v, r))
            .collect::<Result<_>>()?;
        let mut density = vec![0.0; domain.len()];
        let mut extra = vec![0.0; domain.len()];
        let jf = j as f64;
        let mut window_energy = 0.0;
        for b in &balls {
            let g = 2.0 * jf * b.upper;
            if g > 0.0 {
                let dst = if b.part == Part::N { &mut extra } else { &mut density };
                domain.for_each_within(domain.point(b.center), 2.0 * r, false, |z, _| dst[z] += g);
            }
            if margin_of(b.center) > window {
                window_energy += g * b.mass_double;
            }
        }
        let full_density: Vec<f64> = density.iter().zip(&extra).map(|(a, b)| a + b).collect();
        let integral = |g: &[f64], power: f64| -> f64 {
            g.iter().zip(mu).map(|(v, w)| v.powf(power) * w).sum()
        };
        levels.push(GradientLevel {
            level: j,
            energy: integral(&density, 1.0),
            energy_power: integral(&density, p),
            full_energy: integral(&full_density, 1.0),
            full_energy_power: integral(&full_density, p),
            window_energy,
            covers,
            balls,
            density,
            full_density,
        });
    }
    Ok(GradientSequence {
        theorem,
        p,
        window,
        levels,
        budgets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{classify_points, HField};
    use mapping_numbers::RadonWeight;
    use std::sync::Arc;

    fn params(theorem: Theorem) -> ClassifyParams {
        ClassifyParams {
            theorem,
            weight: RadonWeight::base(),
            spread: 1.0,
            q: 2.0,
            p: 1.0,
            epsilon: 1.0,
            levels: vec![10],
            lip_cutoff: f64::INFINITY,
            distortion_cutoff: f64::INFINITY,
            stride: 1,
            h: HField::Constant(1.0),
        }
    }

    fn grid() -> Arc<MetricMeasureSpace> {
        Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.02).unwrap())
    }

    #[test]
    fn identity_ball_carries_two_on_its_double() {
        let d = grid();
        let m = SampledMapping::from_fn(d.clone(), d.clone(), true, |x| x.to_vec()).unwrap();
        let mut prm = params(Theorem::SobolevLip);
        prm.levels = vec![10, 20];
        let part = classify_points(&m, &prm).unwrap();
        let seq = assemble_gradients(&m, &part, &prm).unwrap();
        let lv = seq.level(10).unwrap();
        // the grid has a sample at exactly distance 1/10 along the axes
        for b in lv.theorem_balls() {
            assert!((b.upper - 0.1).abs() < 1e-12, "{}", b.upper);
        }
        let x = lv.covers[0].centers[0];
        assert!(lv.density[x] >= 2.0 - 1e-12);
        let rel = (lv.energy - lv.recomputed_energy()).abs() / lv.energy;
        assert!(rel < 1e-9);
    }

    #[test]
    fn constant_map_has_zero_energy() {
        let d = grid();
        let m = SampledMapping::from_fn(d.clone(), d.clone(), false, |_| vec![0.3, 0.3]).unwrap();
        let prm = params(Theorem::Bv);
        let part = classify_points(&m, &prm).unwrap();
        let seq = assemble_gradients(&m, &part, &prm).unwrap();
        for lv in &seq.levels {
            assert_eq!(lv.energy, 0.0);
            assert_eq!(lv.full_energy, 0.0);
            assert!(lv.density.iter().all(|&v| v == 0.0));
        }
    }
}
