use std::f64::consts::PI;

use hausdorff_content::{codim_content, dim_content, Cover, CoverBall, CoverForm};
use space_core::MetricMeasureSpace;

fn plane(h: f64) -> MetricMeasureSpace {
    MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], h).unwrap()
}

/// Samples on the column closest to `x1 = 0.5`.
fn vertical_segment(s: &MetricMeasureSpace) -> Vec<usize> {
    let x = s.nearest(&[0.5, 0.5]).unwrap().0;
    let col = s.point(x)[0];
    (0..s.len()).filter(|&i| s.point(i)[0] == col).collect()
}

/// Cheapest cover of the segment by `n` equal balls stacked along it.
fn uniform_cover_oracle(s: &MetricMeasureSpace, seg: &[usize], cap: f64) -> f64 {
    let col = s.point(seg[0])[0];
    let mut best = f64::INFINITY;
    for n in 10..=200 {
        let r = 1.0 / (2.0 * n as f64) * 1.0001;
        if r > cap || r < s.trusted_floor() {
            continue;
        }
        let balls: Vec<CoverBall> = (0..n)
            .map(|i| {
                let y = (i as f64 + 0.5) / n as f64;
                CoverBall {
                    center: s.nearest(&[col, y]).unwrap().0,
                    radius: r,
                }
            })
            .collect();
        let c = Cover::from_balls(s, CoverForm::Codimension { p: 1.0 }, balls, seg);
        if c.covered {
            best = best.min(c.cost);
        }
    }
    best
}

#[test]
fn segment_codimension_one_content() {
    let s = plane(0.005);
    let seg = vertical_segment(&s);
    let est = codim_content(&s, &seg, 1.0, 0.05, 3).unwrap();
    assert!(est.cover.covered);
    let oracle = uniform_cover_oracle(&s, &seg, 0.05);
    assert!((est.estimate / (PI / 2.0) - 1.0).abs() <= 0.25, "{}", est.estimate);
    assert!((oracle / (PI / 2.0) - 1.0).abs() <= 0.25, "{oracle}");
    assert!(est.lower_bound <= est.estimate);
}

#[test]
fn single_point_content_shrinks_with_the_cap() {
    let s = plane(0.005);
    let c = s.nearest(&[0.5, 0.5]).unwrap().0;
    let mut last = f64::INFINITY;
    for cap in [0.1, 0.05, 0.025] {
        let e = codim_content(&s, &[c], 1.0, cap, 1).unwrap();
        assert!(e.estimate <= PI * cap * 1.05);
        assert!(e.estimate <= last);
        assert!(e.cover.max_radius() <= cap);
        last = e.estimate;
    }
}

#[test]
fn square_content_grows_like_inverse_cap() {
    let s = plane(0.01);
    let all: Vec<usize> = (0..s.len()).collect();
    let coarse = codim_content(&s, &all, 1.0, 0.1, 1).unwrap();
    let fine = codim_content(&s, &all, 1.0, 0.05, 1).unwrap();
    let growth = fine.estimate / coarse.estimate;
    assert!(growth > 1.5 && growth < 2.6, "{growth}");
}

#[test]
fn dimension_one_contents() {
    let s = plane(0.01);
    let seg = vertical_segment(&s);
    let e = dim_content(&s, &seg, 1.0, 0.05, 2).unwrap();
    assert!((e.estimate - 1.0).abs() <= 0.2, "{}", e.estimate);

    let boundary: Vec<usize> = (0..s.len())
        .filter(|&i| {
            let p = s.point(i);
            p.iter().any(|&v| v < 0.01 || v > 0.99)
        })
        .collect();
    let b = dim_content(&s, &boundary, 1.0, 0.05, 2).unwrap();
    assert!((b.estimate - 4.0).abs() <= 0.8, "{}", b.estimate);

    let c = s.nearest(&[0.5, 0.5]).unwrap().0;
    for cap in [0.2, 0.1, 0.05] {
        assert!(dim_content(&s, &[c], 1.0, cap, 1).unwrap().estimate <= 2.0 * cap);
    }
}

#[test]
fn witness_covers_give_monotone_and_subadditive_bounds() {
    let s = plane(0.01);
    let seg = vertical_segment(&s);
    let (lower, upper): (Vec<usize>, Vec<usize>) =
        seg.iter().partition(|&&i| s.point(i)[1] < 0.5);
    let whole = codim_content(&s, &seg, 1.0, 0.05, 2).unwrap();
    let part = whole.cover.restricted_to(&s, &lower);
    assert!(part.covered);
    assert!(part.cost <= whole.estimate);

    let a = codim_content(&s, &lower, 1.0, 0.05, 2).unwrap();
    let b = codim_content(&s, &upper, 1.0, 0.05, 2).unwrap();
    let joined = a.cover.union(&b.cover, &s, &seg);
    assert!(joined.covered);
    assert!((joined.cost - (a.estimate + b.estimate)).abs() <= 1e-12 * joined.cost);
}

#[test]
fn smaller_cap_never_helps_much() {
    let s = plane(0.01);
    let seg = vertical_segment(&s);
    let big = codim_content(&s, &seg, 1.0, 0.1, 2).unwrap();
    let small = codim_content(&s, &seg, 1.0, 0.05, 2).unwrap();
    assert!(small.estimate >= big.estimate * 0.9);
}

#[test]
fn cover_json_round_trip() {
    let s = plane(0.02);
    let seg = vertical_segment(&s);
    let e = codim_content(&s, &seg, 1.0, 0.1, 1).unwrap();
    let text = serde_json::to_string(&e.cover).unwrap();
    let back: Cover = serde_json::from_str(&text).unwrap();
    assert_eq!(back, e.cover);
    assert_eq!(back.recompute_cost(&s), e.estimate);
}
