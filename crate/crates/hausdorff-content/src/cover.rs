use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

/// Which covering sum is being minimized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum CoverForm {
    /// `mu(B) / r^p`
    Codimension { p: f64 },
    /// `(2r)^s`
    Dimension { s: f64 },
}

impl CoverForm {
    pub fn ball_cost(&self, space: &MetricMeasureSpace, center: usize, radius: f64) -> f64 {
        match *self {
            CoverForm::Codimension { p } => {
                space.mass_within(space.point(center), radius, false, space.weights())
                    / radius.powf(p)
            }
            CoverForm::Dimension { s } => (2.0 * radius).powf(s),
        }
    }

    /// A sample stands for a cell of width `resolution`; in the dimension form
    /// a ball only counts a sample as covered when it swallows half a cell
    /// beyond it, so that covering `m` collinear samples costs their extent.
    pub fn margin(&self, space: &MetricMeasureSpace) -> f64 {
        match self {
            CoverForm::Codimension { .. } => 0.0,
            CoverForm::Dimension { .. } => {
                let h = space.resolution();
                if h.is_finite() {
                    h / 2.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    pub center: usize,
    pub radius: f64,
}

/// A finite ball cover with its covering sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub form: CoverForm,
    pub balls: Vec<CoverBall>,
    pub cost: f64,
    pub covered: bool,
}

impl Cover {
    pub fn empty(form: CoverForm) -> Self {
        Self {
            form,
            balls: Vec::new(),
            cost: 0.0,
            covered: true,
        }
    }

    /// Builds a cover from balls, recomputing cost and coverage of `target`.
    pub fn from_balls(
        space: &MetricMeasureSpace,
        form: CoverForm,
        mut balls: Vec<CoverBall>,
        target: &[usize],
    ) -> Self {
        balls.sort_by(|a, b| a.center.cmp(&b.center).then(a.radius.total_cmp(&b.radius)));
        let cost = balls
            .iter()
            .map(|b| form.ball_cost(space, b.center, b.radius))
            .sum();
        let mut c = Self {
            form,
            balls,
            cost,
            covered: false,
        };
        c.covered = c.covers(space, target);
        c
    }

    /// Whether every target sample lies in some ball.
    pub fn covers(&self, space: &MetricMeasureSpace, target: &[usize]) -> bool {
        let margin = self.form.margin(space);
        let mut hit = vec![false; space.len()];
        for b in &self.balls {
            space.for_each_within(space.point(b.center), b.radius - margin, false, |j, _| {
                hit[j] = true
            });
        }
        target.iter().all(|&t| hit[t])
    }

    /// Recomputes the covering sum from the balls.
    pub fn recompute_cost(&self, space: &MetricMeasureSpace) -> f64 {
        self.balls
            .iter()
            .map(|b| self.form.ball_cost(space, b.center, b.radius))
            .sum()
    }

    /// Concatenation; covers the union of what the parts cover.
    pub fn union(&self, other: &Cover, space: &MetricMeasureSpace, target: &[usize]) -> Cover {
        let mut balls = self.balls.clone();
        balls.extend(other.balls.iter().copied());
        Cover::from_balls(space, self.form, balls, target)
    }

    /// Drops the balls that meet no point of `target`.
    pub fn restricted_to(&self, space: &MetricMeasureSpace, target: &[usize]) -> Cover {
        let margin = self.form.margin(space);
        let mut wanted = vec![false; space.len()];
        for &t in target {
            wanted[t] = true;
        }
        let balls = self
            .balls
            .iter()
            .copied()
            .filter(|b| {
                let mut any = false;
                space.for_each_within(space.point(b.center), b.radius - margin, false, |j, _| {
                    any |= wanted[j]
                });
                any
            })
            .collect();
        Cover::from_balls(space, self.form, balls, target)
    }

    pub fn max_radius(&self) -> f64 {
        self.balls.iter().map(|b| b.radius).fold(0.0, f64::max)
    }
}
