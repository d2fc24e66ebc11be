use std::time::{Duration, Instant};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::curve::CurveFamily;
use crate::{CurveError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    /// Passes over all curve constraints (p > 1).
    pub max_sweeps: usize,
    /// Relative duality gap at which the ascent stops.
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit_secs: Option<f64>,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            max_sweeps: 20_000,
            tolerance: 1e-6,
            time_limit_secs: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModulusReport {
    pub p: f64,
    /// `sum mu rho^p` of the returned density
    pub value: f64,
    pub density: Vec<f64>,
    /// worst relative shortfall `max(0, 1 - integral / threshold)` over curves
    pub residual: f64,
    /// energy after rescaling the density to satisfy every constraint
    pub feasible_value: f64,
    /// certified lower bound on the discrete modulus
    pub dual_bound: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Discrete p-modulus: `min sum mu_x rho_x^p` over `rho >= 0` with
/// `integral_gamma rho >= 1` for every curve of the family.
pub fn p_modulus(
    space: &MetricMeasureSpace,
    family: &CurveFamily,
    p: f64,
    budget: &SolverBudget,
) -> Result<ModulusReport> {
    p_modulus_with_threshold(space, family, p, 1.0, budget)
}

/// Same with every constraint reading `integral_gamma rho >= threshold`.
pub fn p_modulus_with_threshold(
    space: &MetricMeasureSpace,
    family: &CurveFamily,
    p: f64,
    threshold: f64,
    budget: &SolverBudget,
) -> Result<ModulusReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(CurveError::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if !(threshold > 0.0) {
        return Err(CurveError::InvalidParameter(format!("threshold {threshold}")));
    }
    if family.is_empty() {
        return Ok(ModulusReport {
            p,
            value: 0.0,
            density: vec![0.0; space.len()],
            residual: 0.0,
            feasible_value: 0.0,
            dual_bound: 0.0,
            converged: true,
            iterations: 0,
        });
    }
    let system = System::build(space, family)?;
    if p == 1.0 {
        system.solve_lp(space, threshold, budget)
    } else {
        Ok(system.ascend(space, p, threshold, budget))
    }
}

/// Constraint rows over the points touched by at least one curve.
struct System {
    touched: Vec<usize>,
    mass: Vec<f64>,
    rows: Vec<Vec<(u32, f64)>>,
}

impl System {
    fn build(space: &MetricMeasureSpace, family: &CurveFamily) -> Result<Self> {
        let mut local = vec![u32::MAX; space.len()];
        let mut touched = Vec::new();
        let mut rows = Vec::with_capacity(family.len());
        for curve in &family.curves {
            let mut row = Vec::new();
            for (x, a) in curve.quadrature() {
                space.check_point(x)?;
                if a <= 0.0 {
                    continue;
                }
                if local[x] == u32::MAX {
                    local[x] = touched.len() as u32;
                    touched.push(x);
                }
                row.push((local[x], a));
            }
            rows.push(row);
        }
        let mass: Vec<f64> = touched.iter().map(|&x| space.weight(x)).collect();
        if let Some(i) = mass.iter().position(|&m| !(m > 0.0)) {
            return Err(CurveError::InvalidParameter(format!(
                "curve passes through point {} of zero measure",
                touched[i]
            )));
        }
        Ok(Self {
            touched,
            mass,
            rows,
        })
    }

    fn energy(&self, rho: &[f64], p: f64) -> f64 {
        rho.iter()
            .zip(&self.mass)
            .map(|(r, m)| m * r.powf(p))
            .sum()
    }

    fn min_integral(&self, rho: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(x, a)| a * rho[x as usize]).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    fn report(
        &self,
        space: &MetricMeasureSpace,
        p: f64,
        threshold: f64,
        rho: &[f64],
        dual_bound: f64,
        converged: bool,
        iterations: usize,
    ) -> ModulusReport {
        let value = self.energy(rho, p);
        let m = self.min_integral(rho);
        let scale = if m >= threshold {
            1.0
        } else if m > 0.0 {
            threshold / m
        } else {
            f64::INFINITY
        };
        let mut density = vec![0.0; space.len()];
        for (&x, &r) in self.touched.iter().zip(rho) {
            density[x] = r;
        }
        let feasible_value = value * scale.powf(p);
        ModulusReport {
            p,
            value,
            density,
            residual: (1.0 - m / threshold).max(0.0),
            feasible_value,
            // rounding can push the dual a few ulps past the primal
            dual_bound: dual_bound.min(feasible_value),
            converged,
            iterations,
        }
    }

    /// A feasible fallback: every point gets the largest `threshold / length`
    /// over the curves through it.
    fn fallback(&self, threshold: f64) -> Vec<f64> {
        let mut rho = vec![0.0f64; self.touched.len()];
        for row in &self.rows {
            let len: f64 = row.iter().map(|e| e.1).sum();
            for &(x, _) in row {
                rho[x as usize] = rho[x as usize].max(threshold / len);
            }
        }
        rho
    }

    fn solve_lp(
        &self,
        space: &MetricMeasureSpace,
        threshold: f64,
        budget: &SolverBudget,
    ) -> Result<ModulusReport> {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        if let Some(t) = budget.time_limit_secs {
            lp.set_time_limit(Duration::from_secs_f64(t));
        }
        let vars: Vec<_> = self
            .mass
            .iter()
            .map(|&m| lp.add_var(m, (0.0, f64::INFINITY)))
            .collect();
        for row in &self.rows {
            let mut expr = LinearExpr::empty();
            for &(x, a) in row {
                expr.add(vars[x as usize], a);
            }
            lp.add_constraint(expr, ComparisonOp::Ge, threshold);
        }
        match lp.solve() {
            Ok(SolveOutcome::Solution(sol)) => {
                let rho: Vec<f64> = vars.iter().map(|&v| sol.var_value(v).max(0.0)).collect();
                let optimum = sol.objective();
                Ok(self.report(space, 1.0, threshold, &rho, optimum, true, 1))
            }
            Ok(SolveOutcome::Interrupted(_)) => {
                let rho = self.fallback(threshold);
                Ok(self.report(space, 1.0, threshold, &rho, 0.0, false, 1))
            }
            Err(e) => Err(CurveError::Solver(e.to_string())),
        }
    }

    /// Coordinate ascent on the Lagrange multipliers. For fixed multipliers
    /// the primal minimizer is `rho_x = (s_x / (p mu_x))^(1/(p-1))` with
    /// `s = A^T lambda`; each multiplier update solves its own constraint
    /// with equality (or drops to zero), which is an exact coordinate step.
    fn ascend(
        &self,
        space: &MetricMeasureSpace,
        p: f64,
        threshold: f64,
        budget: &SolverBudget,
    ) -> ModulusReport {
        let q = 1.0 / (p - 1.0);
        let start = Instant::now();
        let rho_of = |s: f64, m: f64| -> f64 {
            if s <= 0.0 {
                0.0
            } else {
                (s / (p * m)).powf(q)
            }
        };
        let mut lambda = vec![0.0; self.rows.len()];
        let mut s = vec![0.0; self.touched.len()];
        let mut best_dual = 0.0f64;
        let mut sweeps = 0;
        let mut converged = false;
        let mut rho: Vec<f64> = vec![0.0; self.touched.len()];
        while sweeps < budget.max_sweeps {
            sweeps += 1;
            for (k, row) in self.rows.iter().enumerate() {
                let old = lambda[k];
                if old != 0.0 {
                    for &(x, a) in row {
                        s[x as usize] -= old * a;
                    }
                }
                let phi = |t: f64| -> f64 {
                    row.iter()
                        .map(|&(x, a)| {
                            a * rho_of(s[x as usize] + t * a, self.mass[x as usize])
                        })
                        .sum()
                };
                let t = if phi(0.0) >= threshold {
                    0.0
                } else if p == 2.0 {
                    let slope: f64 = row
                        .iter()
                        .map(|&(x, a)| a * a / (2.0 * self.mass[x as usize]))
                        .sum();
                    (threshold - phi(0.0)) / slope
                } else {
                    let dphi = |t: f64| -> f64 {
                        row.iter()
                            .map(|&(x, a)| {
                                let m = self.mass[x as usize];
                                let v = s[x as usize] + t * a;
                                if v <= 0.0 {
                                    0.0
                                } else {
                                    a * a * q / (p * m) * (v / (p * m)).powf(q - 1.0)
                                }
                            })
                            .sum()
                    };
                    solve_monotone(phi, dphi, threshold, old.max(1e-300))
                };
                lambda[k] = t;
                if t != 0.0 {
                    for &(x, a) in row {
                        s[x as usize] += t * a;
                    }
                }
            }
            for (i, r) in rho.iter_mut().enumerate() {
                *r = rho_of(s[i], self.mass[i]);
            }
            let energy = self.energy(&rho, p);
            let dual = threshold * lambda.iter().sum::<f64>() - (p - 1.0) * energy;
            best_dual = best_dual.max(dual);
            let m = self.min_integral(&rho);
            let feasible = if m >= threshold {
                energy
            } else if m > 0.0 {
                energy * (threshold / m).powf(p)
            } else {
                f64::INFINITY
            };
            if feasible - best_dual <= budget.tolerance * feasible {
                converged = true;
                break;
            }
            if budget
                .time_limit_secs
                .is_some_and(|t| start.elapsed().as_secs_f64() > t)
            {
                break;
            }
        }
        self.report(space, p, threshold, &rho, best_dual, converged, sweeps)
    }
}

/// Root of an increasing function `phi(t) = target` on `t >= 0`, with
/// `phi(0) < target`. Newton steps inside a shrinking bracket.
fn solve_monotone(
    phi: impl Fn(f64) -> f64,
    dphi: impl Fn(f64) -> f64,
    target: f64,
    guess: f64,
) -> f64 {
    let mut lo = 0.0;
    let mut hi = guess.max(1e-12);
    while phi(hi) < target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return lo;
        }
    }
    let mut t = hi;
    for _ in 0..200 {
        let v = phi(t) - target;
        if v == 0.0 {
            return t;
        }
        if v > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = dphi(t);
        let newton = t - v / d;
        t = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }
    // the upper end of the bracket keeps the constraint satisfied
    if phi(t) >= target {
        t
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;

    #[test]
    fn empty_family_has_zero_modulus() {
        let s = MetricMeasureSpace::uniform_grid(&[0.0], &[1.0], 0.1).unwrap();
        let r = p_modulus(&s, &CurveFamily::default(), 2.0, &SolverBudget::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn single_segment_closed_form() {
        // one curve over n samples of an interval: optimum 1 / sum(a^2/mu)
        let s = MetricMeasureSpace::uniform_grid(&[0.0], &[1.0], 0.1).unwrap();
        let c = Curve::new(&s, (0..10).collect()).unwrap();
        let fam = CurveFamily::explicit(vec![c]);
        let r = p_modulus(&s, &fam, 2.0, &SolverBudget::default()).unwrap();
        let expected = 1.0 / (8.0 * 0.1 + 2.0 * 0.05 * 0.05 / 0.1);
        assert!((r.value - expected).abs() < 1e-9 * expected, "{}", r.value);
        assert!(r.dual_bound <= r.feasible_value * (1.0 + 1e-12));
        let l1 = p_modulus(&s, &fam, 1.0, &SolverBudget::default()).unwrap();
        // all weight on one interior point: mu/a = 1
        assert!((l1.value - 1.0).abs() < 1e-9, "{}", l1.value);
    }

    #[test]
    fn general_exponent_matches_closed_form() {
        // single curve, uniform interior weights: rho_x proportional to
        // (a_x / mu_x)^(1/(p-1)); value = (sum a^(p/(p-1)) mu^(-1/(p-1)))^(1-p)
        let s = MetricMeasureSpace::uniform_grid(&[0.0], &[1.0], 0.1).unwrap();
        let c = Curve::new(&s, (0..10).collect()).unwrap();
        let fam = CurveFamily::explicit(vec![c.clone()]);
        for p in [1.5, 3.0] {
            let r = p_modulus(&s, &fam, p, &SolverBudget::default()).unwrap();
            let sum: f64 = c
                .quadrature()
                .iter()
                .map(|&(x, a)| a.powf(p / (p - 1.0)) * s.weight(x).powf(-1.0 / (p - 1.0)))
                .sum();
            let expected = sum.powf(1.0 - p);
            assert!((r.feasible_value - expected).abs() < 1e-6 * expected, "p={p}");
            assert!(r.converged);
        }
    }
}
