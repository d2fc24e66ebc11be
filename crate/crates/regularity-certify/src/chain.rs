use serde::{Deserialize, Serialize};

use crate::constants::{sobolev_conjugate, Constants};
use crate::gradient::{BallTerm, GradientLevel};
use crate::num;
use crate::partition::Part;

/// Relative slack allowed in every arithmetic comparison.
pub const ARITHMETIC_TOLERANCE: f64 = 1e-9;

/// One inequality `lhs <= rhs` of a proof chain at one level. Per-ball steps
/// sum both sides and count the balls where the inequality fails.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub step: String,
    #[serde(with = "num")]
    pub lhs: f64,
    #[serde(with = "num")]
    pub rhs: f64,
    pub holds: bool,
    pub violations: usize,
}

fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + ARITHMETIC_TOLERANCE * rhs.abs()
}

impl Link {
    fn total(step: &str, lhs: f64, rhs: f64) -> Self {
        let holds = within(lhs, rhs);
        Self {
            step: step.into(),
            lhs,
            rhs,
            holds,
            violations: usize::from(!holds),
        }
    }

    fn equal(step: &str, lhs: f64, rhs: f64) -> Self {
        let holds = (lhs - rhs).abs() <= ARITHMETIC_TOLERANCE * lhs.abs().max(rhs.abs());
        Self {
            step: step.into(),
            lhs,
            rhs,
            holds,
            violations: usize::from(!holds),
        }
    }

    fn per_ball<'a>(
        step: &str,
        balls: impl Iterator<Item = &'a BallTerm>,
        mut sides: impl FnMut(&BallTerm) -> (f64, f64),
    ) -> Self {
        let (mut lhs, mut rhs, mut violations) = (0.0, 0.0, 0);
        for b in balls {
            let (l, r) = sides(b);
            lhs += l;
            rhs += r;
            if !within(l, r) {
                violations += 1;
            }
        }
        Self {
            step: step.into(),
            lhs,
            rhs,
            holds: violations == 0 && within(lhs, rhs),
            violations,
        }
    }
}

/// Run-wide numbers the chains compare against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainContext {
    /// effective constants
    pub constants: Constants,
    pub epsilon: f64,
    pub p: f64,
    /// integral of the linear budget over the domain
    pub linear_total: f64,
    /// integral of the power budget over the domain
    pub power_total: f64,
    pub image_volume: f64,
    /// the certified bound
    pub bound: f64,
}

fn of(level: &GradientLevel, part: Part) -> impl Iterator<Item = &BallTerm> {
    level.balls.iter().filter(move |b| b.part == part)
}

/// The total-variation chain: Lipschitz balls `A1..A3`, Young split of the
/// distortion balls `D1..D5`, then the energy identity and the two totals.
pub fn bv_chain(level: &GradientLevel, ctx: &ChainContext) -> Vec<Link> {
    let c = &ctx.constants;
    let (cd, co, q) = (c.doubling, c.regularity, c.q);
    let cm = c.overlap();
    let e = ctx.epsilon;
    let conj = q / (q - 1.0);
    let e_conj = e.powf(conj);
    let e_inv = e.powf(-1.0 / (q - 1.0));
    let j = level.level as f64;
    let mut links = Vec::new();

    links.push(Link::per_ball("A1", of(level, Part::A), |b| {
        (
            2.0 * j * b.upper * b.mass_double,
            2.0 * cd * b.weight_spread * (b.field + e_conj),
        )
    }));
    links.push(Link::per_ball("A2", of(level, Part::A), |b| {
        (
            2.0 * cd * b.weight_spread * (b.field + e_conj),
            2.0 * cd * b.budget_linear,
        )
    }));
    let a_sum: f64 = of(level, Part::A).map(|b| b.budget_linear).sum();
    let a3 = Link::total("A3", 2.0 * cd * a_sum, 2.0 * cd * cm * ctx.linear_total);
    let a_total = a3.rhs;
    links.push(a3);

    let b1 = |b: &BallTerm| 2.0 * cd * co.powf(1.0 / q) * b.lower;
    let b2 = |b: &BallTerm| b.weight_spread.powf((q - 1.0) / q) * (b.field + e);
    let d1_rhs = |b: &BallTerm| {
        2.0 * j
            * b.lower
            * b.mass_double
            * (b.weight_spread / b.mass_spread).powf((q - 1.0) / q)
            * (b.field + e)
    };
    let young = |b: &BallTerm| e * b1(b).powf(q) + e_inv * b2(b).powf(conj);
    let d4_rhs = |b: &BallTerm| {
        (2.0 * cd).powf(q) * co * co * e * b.image_ball
            + 2f64.powf(conj) * e_inv * (b.field.powf(conj) + e_conj) * b.weight_spread
    };
    links.push(Link::per_ball("D1", of(level, Part::D), |b| {
        (2.0 * j * b.upper * b.mass_double, d1_rhs(b))
    }));
    links.push(Link::per_ball("D2", of(level, Part::D), |b| (d1_rhs(b), b1(b) * b2(b))));
    links.push(Link::per_ball("D3", of(level, Part::D), |b| (b1(b) * b2(b), young(b))));
    links.push(Link::per_ball("D4", of(level, Part::D), |b| (young(b), d4_rhs(b))));
    let d_sum: f64 = of(level, Part::D).map(d4_rhs).sum();
    let d5 = Link::total(
        "D5",
        d_sum,
        (2.0 * cd).powf(q) * co * co * cm * e * ctx.image_volume
            + cm * 2f64.powf(conj) * e_inv * ctx.linear_total,
    );
    let d_total = d5.rhs;
    links.push(d5);

    let recomputed = level.recomputed_energy();
    links.push(Link::equal("energy", level.energy, recomputed));
    links.push(Link::total("total", recomputed, a_total + d_total));
    links.push(Link::total("bound", a_total + d_total, ctx.bound));
    links
}

/// The Lipschitz-route `p`-energy chain `P1..P5` and the two energy steps.
pub fn lip_chain(level: &GradientLevel, ctx: &ChainContext) -> Vec<Link> {
    let c = &ctx.constants;
    let cd = c.doubling;
    let cm = c.overlap();
    let (e, p) = (ctx.epsilon, ctx.p);
    let j = level.level as f64;
    let mut links = Vec::new();
    let avg = |b: &BallTerm, v: f64| v / b.mass_spread;
    links.push(Link::per_ball("P1", of(level, Part::A), |b| {
        (
            (j * b.upper).powf(p) * b.mass_double,
            b.mass_double * (avg(b, b.weight_spread) * (b.field + e)).powf(p),
        )
    }));
    links.push(Link::per_ball("P2", of(level, Part::A), |b| {
        (
            b.mass_double * (avg(b, b.weight_spread) * (b.field + e)).powf(p),
            b.mass_double * avg(b, b.budget_linear).powf(p),
        )
    }));
    links.push(Link::per_ball("P3", of(level, Part::A), |b| {
        (
            b.mass_double * avg(b, b.budget_linear).powf(p),
            b.mass_double * avg(b, b.budget_power),
        )
    }));
    links.push(Link::per_ball("P4", of(level, Part::A), |b| {
        (b.mass_double * avg(b, b.budget_power), cd * b.budget_power)
    }));
    let sum: f64 = of(level, Part::A).map(|b| cd * b.budget_power).sum();
    let p5 = Link::total("P5", sum, cd * cm * ctx.power_total);
    let holder = 2f64.powf(p) * cm.powf(p - 1.0);
    let p5_rhs = p5.rhs;
    links.push(p5);
    links.push(Link::equal("energy", level.energy, level.recomputed_energy()));
    links.push(Link::total(
        "E1",
        level.energy_power,
        holder * level.power_sum(Part::A, p),
    ));
    links.push(Link::total("E2", holder * p5_rhs, ctx.bound));
    links
}

/// The distortion-route `p`-energy chain `H1..H6` (Young split in `H4`) and
/// the two energy steps.
pub fn distortion_chain(level: &GradientLevel, ctx: &ChainContext) -> Vec<Link> {
    let c = &ctx.constants;
    let (cd, co, q) = (c.doubling, c.regularity, c.q);
    let cm = c.overlap();
    let (e, p) = (ctx.epsilon, ctx.p);
    let star = sobolev_conjugate(p, q);
    let j = level.level as f64;
    let mut links = Vec::new();
    let head = |b: &BallTerm| (j * b.lower).powf(p) * b.mass_double * (b.field + e).powf(p);
    let h1 = |b: &BallTerm| head(b) * (b.weight_spread / b.mass_spread).powf(p * (q - 1.0) / q);
    let h2 = |b: &BallTerm| head(b) * (b.budget_power / b.mass_spread).powf((q - p) / q);
    let x = |b: &BallTerm| cd * co.powf(p / q) * b.lower.powf(p);
    let y = |b: &BallTerm| b.budget_power.powf((q - p) / q) * (b.field + e).powf(p);
    let h4 = |b: &BallTerm| x(b).powf(q / p) + y(b).powf(q / (q - p));
    let h5 = |b: &BallTerm| {
        cd.powf(q / p) * co * co * b.image_ball
            + 2f64.powf(star) * (b.field.powf(star) + e.powf(star)) * b.budget_power
    };
    links.push(Link::per_ball("H1", of(level, Part::D), |b| {
        ((j * b.upper).powf(p) * b.mass_double, h1(b))
    }));
    links.push(Link::per_ball("H2", of(level, Part::D), |b| (h1(b), h2(b))));
    links.push(Link::per_ball("H3", of(level, Part::D), |b| (h2(b), x(b) * y(b))));
    links.push(Link::per_ball("H4", of(level, Part::D), |b| (x(b) * y(b), h4(b))));
    links.push(Link::per_ball("H5", of(level, Part::D), |b| (h4(b), h5(b))));
    let sum: f64 = of(level, Part::D).map(h5).sum();
    let h6 = Link::total(
        "H6",
        sum,
        cd.powf(q / p) * co * co * cm * ctx.image_volume
            + 2f64.powf(star) * cm * ctx.linear_total,
    );
    let holder = 2f64.powf(p) * cm.powf(p - 1.0);
    let h6_rhs = h6.rhs;
    links.push(h6);
    links.push(Link::equal("energy", level.energy, level.recomputed_energy()));
    links.push(Link::total(
        "E1",
        level.energy_power,
        holder * level.power_sum(Part::D, p),
    ));
    links.push(Link::total("E2", holder * h6_rhs, ctx.bound));
    links
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_relative() {
        assert!(within(1.0 + 1e-10, 1.0));
        assert!(!within(1.0 + 1e-8, 1.0));
        assert!(within(0.0, 0.0));
        assert!(within(5.0, f64::INFINITY));
        assert!(!within(f64::NAN, 1.0));
        assert!(Link::equal("e", 0.0, 0.0).holds);
        assert!(!Link::equal("e", 1.0, 1.1).holds);
    }

    #[test]
    fn per_ball_counts_offenders() {
        let ball = |upper: f64| BallTerm {
            center: 0,
            part: Part::A,
            upper,
            lower: f64::INFINITY,
            mass: 1.0,
            mass_double: 1.0,
            mass_spread: 1.0,
            weight_spread: 1.0,
            field: 0.0,
            image_ball: 0.0,
            h_min: 0.0,
            budget_linear: 0.0,
            budget_power: 0.0,
        };
        let balls = [ball(1.0), ball(3.0), ball(0.5)];
        let l = Link::per_ball("x", balls.iter(), |b| (b.upper, 2.0));
        assert_eq!(l.violations, 1);
        assert!(!l.holds);
        assert_eq!(l.lhs, 4.5);
        assert_eq!(l.rhs, 6.0);
    }
}
