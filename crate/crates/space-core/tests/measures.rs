use proptest::prelude::*;
use space_core::{
    ahlfors_check, doubling_constant_estimate, inner_region, MetricMeasureSpace, Metric,
    NormMetric,
};

fn square(h: f64) -> MetricMeasureSpace {
    MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], h).unwrap()
}

#[test]
fn doubling_is_invariant_under_weight_scaling() {
    let s = square(0.02);
    let scaled = s
        .with_weights(s.weights().iter().map(|w| w * 7.5).collect())
        .unwrap();
    let radii = [0.05, 0.1];
    let a = doubling_constant_estimate(&s, &radii, None).unwrap();
    let b = doubling_constant_estimate(&scaled, &radii, None).unwrap();
    assert!((a.c_d_hat - b.c_d_hat).abs() <= 1e-12 * a.c_d_hat);
}

#[test]
fn scaled_metric_rescales_ahlfors_lower_constant() {
    let s = square(0.02);
    let radii = [0.06, 0.12];
    let inner = inner_region(&s, 0.3).unwrap();
    let base = ahlfors_check(&s, 2.0, &radii, Some(&inner.members), 2.0).unwrap();
    let t = s
        .with_metric(Metric::Norm(NormMetric::euclidean().scaled(2.0)))
        .unwrap();
    assert!((t.resolution() - 2.0 * s.resolution()).abs() < 1e-15);
    let radii2: Vec<f64> = radii.iter().map(|r| 2.0 * r).collect();
    let inner2 = inner_region(&t, 0.6).unwrap();
    let doubled = ahlfors_check(&t, 2.0, &radii2, Some(&inner2.members), 2.0).unwrap();
    // same balls, radii doubled: mu/r^2 drops by four
    assert!((base.upper_hat / doubled.upper_hat - 4.0).abs() < 1e-9);
}

#[test]
fn inner_region_of_planar_square() {
    let s = square(0.01);
    let r = inner_region(&s, 0.25).unwrap();
    assert_eq!(r.members.len(), 50 * 50);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ball_mass_is_monotone_in_radius(
        x in 0.0f64..1.0, y in 0.0f64..1.0, r in 0.0f64..0.6, dr in 0.0f64..0.3
    ) {
        let s = square(0.05);
        let w = s.weights();
        let small = s.mass_within(&[x, y], r, false, w);
        let large = s.mass_within(&[x, y], r + dr, false, w);
        let closed = s.mass_within(&[x, y], r, true, w);
        prop_assert!(small <= closed + 1e-15);
        prop_assert!(closed <= large + 1e-15 || dr == 0.0);
        prop_assert!(large <= s.total_weight() + 1e-12);
    }

    #[test]
    fn ball_members_match_brute_force(i in 0usize..400, r in 0.01f64..0.5) {
        let s = square(0.05);
        let b = s.ball(i, r, false).unwrap();
        let brute: Vec<usize> = (0..s.len()).filter(|&j| s.distance(i, j) < r).collect();
        prop_assert_eq!(b.members, brute);
    }

    #[test]
    fn doubling_at_least_one(r in 0.1f64..0.4) {
        let s = square(0.05);
        let est = doubling_constant_estimate(&s, &[r], None).unwrap();
        prop_assert!(est.c_d_hat >= 1.0);
    }
}
