use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::cover::{Cover, CoverBall, CoverForm};
use crate::{ContentError, Result};

/// Upper bound with its witness cover and a dual lower-bound diagnostic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub estimate: f64,
    /// A covering-LP dual value: no cover drawn from the same candidate balls
    /// is cheaper than this.
    pub lower_bound: f64,
    pub cover: Cover,
    pub radii: Vec<f64>,
}

const RADIUS_STEP: f64 = std::f64::consts::SQRT_2;

/// Candidate radii: the cap, then geometric steps down to the trusted floor.
fn radius_grid(cap: f64, floor: f64) -> Vec<f64> {
    let mut radii = vec![cap];
    loop {
        let next = radii.last().unwrap() / RADIUS_STEP;
        if next < floor {
            break;
        }
        radii.push(next);
    }
    radii
}

/// Target samples around one center, sorted by distance, with the prefix
/// length and covering cost for every candidate radius.
struct Center {
    order: Vec<u32>,
    prefix: Vec<u32>,
    cost: Vec<f64>,
}

impl Center {
    fn members(&self, k: usize) -> &[u32] {
        &self.order[..self.prefix[k] as usize]
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Score(f64);

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Search<'a> {
    space: &'a MetricMeasureSpace,
    target: Vec<usize>,
    radii: Vec<f64>,
    margin: f64,
    centers: Vec<Center>,
}

impl<'a> Search<'a> {
    fn new(space: &'a MetricMeasureSpace, target: Vec<usize>, form: CoverForm, cap: f64) -> Self {
        let radii = radius_grid(cap, space.trusted_floor());
        let margin = form.margin(space);
        let mut tpos = vec![u32::MAX; space.len()];
        for (k, &t) in target.iter().enumerate() {
            tpos[t] = k as u32;
        }
        let w = space.weights();
        let centers = target
            .par_iter()
            .map(|&c| {
                let mut near: Vec<(f64, u32)> = Vec::new();
                let mut mass = vec![0.0; radii.len()];
                space.for_each_within(space.point(c), radii[0], false, |j, d| {
                    for (k, &r) in radii.iter().enumerate() {
                        if d < r {
                            mass[k] += w[j];
                        }
                    }
                    if tpos[j] != u32::MAX && d < radii[0] - margin {
                        near.push((d, tpos[j]));
                    }
                });
                near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let prefix = radii
                    .iter()
                    .map(|&r| near.partition_point(|&(d, _)| d < r - margin) as u32)
                    .collect();
                let cost = radii
                    .iter()
                    .zip(&mass)
                    .map(|(&r, &m)| match form {
                        CoverForm::Codimension { p } => m / r.powf(p),
                        CoverForm::Dimension { s } => (2.0 * r).powf(s),
                    })
                    .collect();
                Center {
                    order: near.into_iter().map(|(_, t)| t).collect(),
                    prefix,
                    cost,
                }
            })
            .collect();
        Self {
            space,
            target,
            radii,
            margin,
            centers,
        }
    }

    fn candidates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.centers.len()).flat_map(move |c| (0..self.radii.len()).map(move |k| (c, k)))
    }

    fn score(&self, c: usize, k: usize, covered: &[u32]) -> f64 {
        let fresh = self.centers[c]
            .members(k)
            .iter()
            .filter(|&&t| covered[t as usize] == 0)
            .count();
        if fresh == 0 {
            return 0.0;
        }
        let cost = self.centers[c].cost[k];
        if cost == 0.0 {
            f64::INFINITY
        } else {
            fresh as f64 / cost
        }
    }

    /// Lazy greedy: repeatedly take the ball covering the most new samples
    /// per unit cost. Ties go to the lowest (center, radius index).
    fn greedy(&self) -> (Vec<(usize, usize)>, Vec<u32>) {
        let n_radii = self.radii.len();
        let mut counts = vec![0u32; self.target.len()];
        let mut heap: BinaryHeap<(Score, Reverse<usize>)> = self
            .candidates()
            .map(|(c, k)| (Score(self.score(c, k, &counts)), Reverse(c * n_radii + k)))
            .filter(|(s, _)| s.0 > 0.0)
            .collect();
        let mut left = self.target.len();
        let mut chosen = Vec::new();
        while left > 0 {
            let Some((_, Reverse(id))) = heap.pop() else {
                break;
            };
            let (c, k) = (id / n_radii, id % n_radii);
            let s = self.score(c, k, &counts);
            if s == 0.0 {
                continue;
            }
            let beaten = heap.peek().is_some_and(|top| {
                top.0 .0 > s || (top.0 .0 == s && top.1 .0 < id)
            });
            if beaten {
                heap.push((Score(s), Reverse(id)));
                continue;
            }
            for &t in self.centers[c].members(k) {
                if counts[t as usize] == 0 {
                    left -= 1;
                }
                counts[t as usize] += 1;
            }
            chosen.push((c, k));
        }
        (chosen, counts)
    }

    fn cost(&self, b: (usize, usize)) -> f64 {
        self.centers[b.0].cost[b.1]
    }

    fn add(&self, b: (usize, usize), counts: &mut [u32]) {
        for &t in self.centers[b.0].members(b.1) {
            counts[t as usize] += 1;
        }
    }

    fn remove(&self, b: (usize, usize), counts: &mut [u32]) {
        for &t in self.centers[b.0].members(b.1) {
            counts[t as usize] -= 1;
        }
    }

    /// Smallest radius index at `c` whose ball holds every sample in `need`.
    fn smallest_holding(&self, c: usize, need: &[u32]) -> Option<usize> {
        let center = self.target[c];
        let dmax = need
            .iter()
            .map(|&t| self.space.distance(center, self.target[t as usize]))
            .fold(0.0, f64::max);
        let prefix_ok = |k: usize| {
            let members = self.centers[c].members(k);
            need.iter().all(|t| members.contains(t))
        };
        (0..self.radii.len())
            .rev()
            .find(|&k| self.radii[k] - self.margin > dmax && prefix_ok(k))
    }

    fn improve(&self, balls: &mut Vec<(usize, usize)>, counts: &mut [u32], passes: usize) {
        for _ in 0..passes {
            let before: f64 = balls.iter().map(|&b| self.cost(b)).sum();
            // drop redundant balls, most expensive first
            balls.sort_by(|a, b| self.cost(*b).total_cmp(&self.cost(*a)).then(a.cmp(b)));
            let mut kept = Vec::with_capacity(balls.len());
            for &b in balls.iter() {
                let redundant = self.centers[b.0]
                    .members(b.1)
                    .iter()
                    .all(|&t| counts[t as usize] >= 2);
                if redundant {
                    self.remove(b, counts);
                } else {
                    kept.push(b);
                }
            }
            *balls = kept;
            // shrink to the exclusively covered samples
            for b in balls.iter_mut() {
                let only: Vec<u32> = self.centers[b.0]
                    .members(b.1)
                    .iter()
                    .copied()
                    .filter(|&t| counts[t as usize] == 1)
                    .collect();
                if let Some(k) = self.smallest_holding(b.0, &only) {
                    if k > b.1 && self.cost((b.0, k)) < self.cost(*b) {
                        self.remove(*b, counts);
                        *b = (b.0, k);
                        self.add(*b, counts);
                    }
                }
            }
            self.merge_pass(balls, counts);
            let after: f64 = balls.iter().map(|&b| self.cost(b)).sum();
            if !(after < before) {
                break;
            }
        }
        balls.sort_unstable();
    }

    /// Replaces nearby pairs by one ball when that is cheaper.
    fn merge_pass(&self, balls: &mut Vec<(usize, usize)>, counts: &mut [u32]) {
        let reach = 2.0 * self.radii[0];
        let dim = self.space.dim();
        let mut i = 0;
        while i < balls.len() {
            let mut merged = false;
            for j in (i + 1)..balls.len() {
                let (a, b) = (balls[i], balls[j]);
                let (ca, cb) = (self.target[a.0], self.target[b.0]);
                if self.space.distance(ca, cb) > reach {
                    continue;
                }
                self.remove(a, counts);
                self.remove(b, counts);
                let mut need: Vec<u32> = self.centers[a.0]
                    .members(a.1)
                    .iter()
                    .chain(self.centers[b.0].members(b.1))
                    .copied()
                    .filter(|&t| counts[t as usize] == 0)
                    .collect();
                need.sort_unstable();
                need.dedup();
                let mid: Vec<f64> = (0..dim)
                    .map(|k| 0.5 * (self.space.point(ca)[k] + self.space.point(cb)[k]))
                    .collect();
                let mut options = vec![a.0, b.0];
                if let Some((m, _)) = self.space.nearest(&mid) {
                    if let Ok(pos) = self.target.binary_search(&m) {
                        options.push(pos);
                    }
                }
                let best = options
                    .into_iter()
                    .filter_map(|c| self.smallest_holding(c, &need).map(|k| (c, k)))
                    .min_by(|x, y| self.cost(*x).total_cmp(&self.cost(*y)).then(x.cmp(y)));
                match best {
                    Some(m) if self.cost(m) < self.cost(a) + self.cost(b) => {
                        self.add(m, counts);
                        balls[i] = m;
                        balls.swap_remove(j);
                        merged = true;
                        break;
                    }
                    _ => {
                        self.add(a, counts);
                        self.add(b, counts);
                    }
                }
            }
            if !merged {
                i += 1;
            }
        }
    }

    fn lower_bound(&self) -> f64 {
        let mut y = vec![f64::INFINITY; self.target.len()];
        for (c, k) in self.candidates() {
            let m = self.centers[c].members(k);
            if m.is_empty() {
                continue;
            }
            let share = self.centers[c].cost[k] / m.len() as f64;
            for &t in m {
                if share < y[t as usize] {
                    y[t as usize] = share;
                }
            }
        }
        y.iter().filter(|v| v.is_finite()).sum()
    }
}

/// Covering estimate for `target` under `form`, with balls of radius at most
/// `cap`. `effort` is the number of local improvement passes after the greedy
/// seed.
pub fn content(
    space: &MetricMeasureSpace,
    target: &[usize],
    form: CoverForm,
    cap: f64,
    effort: usize,
) -> Result<ContentEstimate> {
    match form {
        CoverForm::Codimension { p } if !(p >= 1.0) => {
            return Err(ContentError::InvalidParameter(format!("p must be >= 1, got {p}")))
        }
        CoverForm::Dimension { s } if !(s >= 0.0) => {
            return Err(ContentError::InvalidParameter(format!("s must be >= 0, got {s}")))
        }
        _ => {}
    }
    for &t in target {
        space.check_point(t)?;
    }
    let res = space.resolution();
    if !(cap >= res) && res.is_finite() || !(cap > 0.0) {
        return Err(ContentError::CapBelowResolution {
            cap,
            resolution: res,
        });
    }
    let mut target = target.to_vec();
    target.sort_unstable();
    target.dedup();
    if target.is_empty() {
        return Ok(ContentEstimate {
            estimate: 0.0,
            lower_bound: 0.0,
            cover: Cover::empty(form),
            radii: radius_grid(cap, space.trusted_floor()),
        });
    }
    let search = Search::new(space, target, form, cap);
    let (mut balls, mut counts) = search.greedy();
    search.improve(&mut balls, &mut counts, effort);
    let cover = Cover::from_balls(
        space,
        form,
        balls
            .iter()
            .map(|&(c, k)| CoverBall {
                center: search.target[c],
                radius: search.radii[k],
            })
            .collect(),
        &search.target,
    );
    Ok(ContentEstimate {
        estimate: cover.cost,
        lower_bound: search.lower_bound(),
        radii: search.radii.clone(),
        cover,
    })
}

/// Codimension-`p` content `inf sum mu(B_k) / r_k^p`, radii at most `cap`.
pub fn codim_content(
    space: &MetricMeasureSpace,
    target: &[usize],
    p: f64,
    cap: f64,
    effort: usize,
) -> Result<ContentEstimate> {
    content(space, target, CoverForm::Codimension { p }, cap, effort)
}

/// `s`-dimensional content `inf sum (2 r_k)^s`, radii at most `cap`.
pub fn dim_content(
    space: &MetricMeasureSpace,
    target: &[usize],
    s: f64,
    cap: f64,
    effort: usize,
) -> Result<ContentEstimate> {
    content(space, target, CoverForm::Dimension { s }, cap, effort)
}
