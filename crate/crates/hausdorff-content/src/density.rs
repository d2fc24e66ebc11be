use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::cover::Cover;
use crate::search::codim_content;
use crate::{ContentError, Result};

/// One level of a nested cover sequence: every radius is at most `cap` and
/// the covering sum stays below `budget`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverLevel {
    pub level: usize,
    pub cap: f64,
    pub budget: f64,
    pub cover: Cover,
}

/// Covers of `target` with level budgets `2^-i * eps`. Caps start at
/// `first_cap` and halve whenever a level does not fit, or after it is
/// accepted; the sequence ends at the trusted floor or after `max_levels`.
pub fn nested_covers(
    space: &MetricMeasureSpace,
    target: &[usize],
    p: f64,
    eps: f64,
    first_cap: f64,
    effort: usize,
    max_levels: usize,
) -> Result<Vec<CoverLevel>> {
    if !(eps > 0.0) {
        return Err(ContentError::InvalidParameter(format!("budget {eps}")));
    }
    let floor = space.trusted_floor();
    let mut cap = first_cap;
    let mut levels = Vec::new();
    while levels.len() < max_levels && cap >= floor {
        let level = levels.len() + 1;
        let budget = eps * 0.5f64.powi(level as i32);
        let est = codim_content(space, target, p, cap, effort)?;
        if est.estimate < budget {
            levels.push(CoverLevel {
                level,
                cap,
                budget,
                cover: est.cover,
            });
        }
        cap /= 2.0;
    }
    if levels.is_empty() {
        return Err(ContentError::BudgetUnreachable);
    }
    Ok(levels)
}

/// `rho = sup over levels and balls of 1_{2B} / r`.
pub fn admissible_density(space: &MetricMeasureSpace, levels: &[CoverLevel]) -> Result<Vec<f64>> {
    let mut rho = vec![0.0; space.len()];
    let mut prev_cap = f64::INFINITY;
    for lv in levels {
        if !(lv.cap < prev_cap) {
            return Err(ContentError::InvalidParameter(format!(
                "level {} cap {} does not decrease",
                lv.level, lv.cap
            )));
        }
        prev_cap = lv.cap;
        for b in &lv.cover.balls {
            if b.radius > lv.cap {
                return Err(ContentError::NotNested {
                    level: lv.level,
                    radius: b.radius,
                    cap: lv.cap,
                });
            }
        }
        let cost = lv.cover.recompute_cost(space);
        if !(cost < lv.budget) {
            return Err(ContentError::OverBudget {
                level: lv.level,
                cost,
                budget: lv.budget,
            });
        }
        for b in &lv.cover.balls {
            let v = 1.0 / b.radius;
            space.for_each_within(space.point(b.center), 2.0 * b.radius, false, |j, _| {
                if v > rho[j] {
                    rho[j] = v;
                }
            });
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{CoverBall, CoverForm};

    fn plane() -> MetricMeasureSpace {
        MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.01).unwrap()
    }

    fn level(s: &MetricMeasureSpace, balls: Vec<CoverBall>, cap: f64, budget: f64) -> CoverLevel {
        CoverLevel {
            level: 1,
            cap,
            budget,
            cover: Cover::from_balls(s, CoverForm::Codimension { p: 1.0 }, balls, &[]),
        }
    }

    #[test]
    fn one_ball_density() {
        let s = plane();
        let c = s.nearest(&[0.505, 0.505]).unwrap().0;
        let lv = level(&s, vec![CoverBall { center: c, radius: 0.05 }], 0.05, 1.0);
        let rho = admissible_density(&s, &[lv]).unwrap();
        for i in 0..s.len() {
            let inside = s.distance(i, c) < 0.1;
            assert_eq!(rho[i], if inside { 20.0 } else { 0.0 });
        }
    }

    #[test]
    fn duplicated_ball_keeps_the_sup() {
        let s = plane();
        let c = s.nearest(&[0.505, 0.505]).unwrap().0;
        let b = CoverBall { center: c, radius: 0.05 };
        let one = level(&s, vec![b], 0.06, 1.0);
        let mut two = level(&s, vec![b], 0.05, 1.0);
        two.level = 2;
        let rho1 = admissible_density(&s, &[one.clone()]).unwrap();
        let rho2 = admissible_density(&s, &[one.clone(), two.clone()]).unwrap();
        assert_eq!(rho1, rho2);
        two.cap = 0.07;
        assert!(admissible_density(&s, &[one, two]).is_err());
    }

    #[test]
    fn budget_and_nesting_are_enforced() {
        let s = plane();
        let c = s.nearest(&[0.505, 0.505]).unwrap().0;
        let over = level(&s, vec![CoverBall { center: c, radius: 0.05 }], 0.05, 1e-6);
        assert!(matches!(
            admissible_density(&s, &[over]),
            Err(ContentError::OverBudget { .. })
        ));
        let wide = level(&s, vec![CoverBall { center: c, radius: 0.05 }], 0.03, 1.0);
        assert!(matches!(
            admissible_density(&s, &[wide]),
            Err(ContentError::NotNested { .. })
        ));
    }
}
