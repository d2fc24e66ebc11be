use serde::{Deserialize, Serialize};
use space_core::MetricMeasureSpace;

use crate::partition::Part;
use crate::{CertifyError, Result};

/// Balls `B(x_k, 1/j)` around separated centres of one level set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverLevel {
    pub level: usize,
    pub part: Part,
    pub radius: f64,
    pub centers: Vec<usize>,
    /// size of the covered level set
    pub covered: usize,
    /// most `(M+1)`-dilated balls meeting at one sample
    pub overlap: usize,
    /// most doubled balls meeting at one sample
    pub overlap_double: usize,
    pub overlap_target: f64,
    pub within_target: bool,
}

fn max_overlap(space: &MetricMeasureSpace, centers: &[usize], radius: f64) -> usize {
    let mut count = vec![0u32; space.len()];
    for &c in centers {
        space.for_each_within(space.point(c), radius, false, |j, _| count[j] += 1);
    }
    count.into_iter().max().unwrap_or(0) as usize
}

/// Greedy cover of `level_set` in index order: a point not yet inside an
/// open ball of radius `1/j` around an earlier centre becomes a centre, so
/// the centres are `1/j`-separated and every point is covered.
pub fn build_cover(
    space: &MetricMeasureSpace,
    level_set: &[usize],
    level: usize,
    spread: f64,
    part: Part,
    overlap_target: f64,
) -> Result<CoverLevel> {
    if level == 0 {
        return Err(CertifyError::InvalidParameter("level 0".into()));
    }
    let radius = 1.0 / level as f64;
    if let Some(b) = space.bounds() {
        let m = (spread + 1.0) * radius;
        for &x in level_set {
            space.check_point(x)?;
            if space.metric().distance_to_box_complement(space.point(x), &b.lo, &b.hi) <= m {
                return Err(CertifyError::OutsideInnerRegion { level, point: x });
            }
        }
    }
    let mut sorted = level_set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut marked = vec![false; space.len()];
    let mut centers = Vec::new();
    for &x in &sorted {
        if marked[x] {
            continue;
        }
        centers.push(x);
        space.for_each_within(space.point(x), radius, false, |j, _| marked[j] = true);
    }
    let overlap = max_overlap(space, &centers, (spread + 1.0) * radius);
    let overlap_double = if spread == 1.0 {
        overlap
    } else {
        max_overlap(space, &centers, 2.0 * radius)
    };
    Ok(CoverLevel {
        level,
        part,
        radius,
        covered: sorted.len(),
        within_target: (overlap.max(overlap_double) as f64) <= overlap_target,
        centers,
        overlap,
        overlap_double,
        overlap_target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_gets_one_ball() {
        let s = MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.05).unwrap();
        let x = s.nearest(&[0.5, 0.5]).unwrap().0;
        let c = build_cover(&s, &[x], 10, 1.0, Part::A, 1024.0).unwrap();
        assert_eq!(c.centers, vec![x]);
        assert_eq!(c.overlap, 1);
    }

    #[test]
    fn level_set_must_be_inner() {
        let s = MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.05).unwrap();
        let x = s.nearest(&[0.1, 0.5]).unwrap().0;
        assert!(matches!(
            build_cover(&s, &[x], 10, 1.0, Part::A, 1024.0),
            Err(CertifyError::OutsideInnerRegion { .. })
        ));
    }

    #[test]
    fn centres_are_separated_and_cover() {
        let s = MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], 0.02).unwrap();
        let set: Vec<usize> = (0..s.len())
            .filter(|&i| s.point(i).iter().all(|&v| v > 0.3 && v < 0.7))
            .collect();
        let c = build_cover(&s, &set, 10, 1.0, Part::D, 1024.0).unwrap();
        for (a, &x) in c.centers.iter().enumerate() {
            for &y in &c.centers[a + 1..] {
                assert!(s.distance(x, y) >= 0.1);
            }
        }
        for &x in &set {
            assert!(c.centers.iter().any(|&y| s.distance(x, y) < 0.1));
        }
        assert!(c.within_target);
    }
}
