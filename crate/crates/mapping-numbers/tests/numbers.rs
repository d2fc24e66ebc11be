use std::sync::Arc;

use mapping_numbers::{
    asymptotic_field, discontinuity_scan, FieldKind, FieldParams, MappingFile, RadiusSchedule,
    RadonWeight, SampledMapping, Selection,
};
use proptest::prelude::*;
use space_core::{Metric, MetricMeasureSpace, NormMetric};

const H: f64 = 0.02;

fn square() -> Arc<MetricMeasureSpace> {
    Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], H).unwrap())
}

fn image_box() -> Arc<MetricMeasureSpace> {
    Arc::new(MetricMeasureSpace::uniform_grid(&[-0.5, -0.5], &[2.5, 2.5], H).unwrap())
}

fn bent(p: &[f64]) -> Vec<f64> {
    vec![p[0] + 0.3 * p[1] * p[1], p[1] + 0.2 * (3.0 * p[0]).sin()]
}

fn bent_map() -> SampledMapping {
    SampledMapping::from_fn(square(), image_box(), true, bent).unwrap()
}

fn schedule() -> RadiusSchedule {
    RadiusSchedule::new(vec![0.16, 0.12, 0.08, 0.06], 3).unwrap()
}

fn at(space: &MetricMeasureSpace, x: f64, y: f64) -> usize {
    space.nearest(&[x, y]).unwrap().0
}

#[test]
fn identity_numbers_are_the_radius() {
    let f = SampledMapping::from_fn(square(), image_box(), true, |p| p.to_vec()).unwrap();
    let x = at(f.domain(), 0.5, 0.5);
    let res = f.domain().resolution();
    assert!((f.upper(x, 0.1).unwrap() - 0.1).abs() <= res);
    assert!((f.lower(x, 0.1).unwrap() - 0.1).abs() <= res);
    assert!((f.distortion_ratio(x, 0.1).unwrap() - 1.0).abs() <= 2.0 * res / 0.1);
    let lip = asymptotic_field(&f, FieldKind::LipUpper, &schedule(), &FieldParams::default(), &Selection::Interior)
        .unwrap();
    assert!(!lip.is_empty());
    for &v in &lip.values {
        assert!((v - 1.0).abs() < 0.1, "{v}");
    }
    assert_eq!(lip.diverging_count(), 0);
    assert!(discontinuity_scan(&f, &schedule(), &Selection::Interior).unwrap().is_empty());
}

#[test]
fn doubling_map_doubles_both_numbers() {
    let f = SampledMapping::from_fn(square(), image_box(), true, |p| vec![2.0 * p[0], 2.0 * p[1]])
        .unwrap();
    let x = at(f.domain(), 0.5, 0.5);
    let res = f.domain().resolution();
    assert!((f.lower(x, 0.1).unwrap() - 0.2).abs() <= 2.0 * res);
    assert!((f.upper(x, 0.1).unwrap() - 0.2).abs() <= 2.0 * res);
    assert!((f.distortion_ratio(x, 0.1).unwrap() - 1.0).abs() <= 2.0 * res / 0.1);
}

#[test]
fn constant_map_has_no_stretch_and_infinite_distortion() {
    let f = SampledMapping::from_fn(square(), image_box(), false, |_| vec![1.0, 1.0]).unwrap();
    let x = at(f.domain(), 0.3, 0.6);
    for r in [0.05, 0.1, 0.3] {
        assert_eq!(f.upper(x, r).unwrap(), 0.0);
        assert_eq!(f.lower(x, r).unwrap(), 0.0);
    }
    let lip = asymptotic_field(&f, FieldKind::LipUpper, &schedule(), &FieldParams::default(), &Selection::All)
        .unwrap();
    assert_eq!(lip.max_value(), 0.0);
    let h = asymptotic_field(&f, FieldKind::DistortionUpper, &schedule(), &FieldParams::default(), &Selection::All)
        .unwrap();
    assert!(h.values.iter().all(|v| v.is_infinite()));
    assert!(SampledMapping::from_fn(square(), image_box(), true, |_| vec![1.0, 1.0]).is_err());
}

#[test]
fn lower_never_exceeds_upper_one_resolution_out() {
    let f = bent_map();
    let res = f.domain().resolution();
    let inner = space_core::inner_region(f.domain(), 0.25).unwrap();
    for &x in inner.members.iter().step_by(17) {
        for r in [0.03, 0.07, 0.15] {
            let l = f.lower(x, r).unwrap();
            let u = f.upper(x, r + res).unwrap();
            assert!(l <= u + 1e-12, "x={x} r={r}: {l} > {u}");
        }
    }
}

#[test]
fn distortion_field_is_at_least_one_inside() {
    let sched = schedule();
    let tol = 3.0 * H / sched.smallest();
    for f in [
        SampledMapping::from_fn(square(), image_box(), true, |p| p.to_vec()).unwrap(),
        bent_map(),
    ] {
        let field = asymptotic_field(&f, FieldKind::DistortionUpper, &sched, &FieldParams::default(), &Selection::Interior)
            .unwrap();
        assert!(!field.is_empty());
        for &v in &field.values {
            assert!(v >= 1.0 - tol, "{v}");
        }
    }
}

#[test]
fn rescaled_target_metric_scales_stretch_and_keeps_distortion() {
    let f = bent_map();
    let c = 2.0;
    let scaled_target = f
        .target()
        .with_metric(Metric::Norm(NormMetric::euclidean().scaled(c)))
        .unwrap();
    let g = f.with_target(Arc::new(scaled_target)).unwrap();
    let sched = schedule();
    let params = FieldParams::default();
    let sel = Selection::InteriorStride(5);
    for kind in [FieldKind::LipUpper, FieldKind::LipLower] {
        let a = asymptotic_field(&f, kind, &sched, &params, &sel).unwrap();
        let b = asymptotic_field(&g, kind, &sched, &params, &sel).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(c * x, *y, "{kind}");
        }
    }
    for kind in [FieldKind::DistortionUpper, FieldKind::DistortionLower] {
        let a = asymptotic_field(&f, kind, &sched, &params, &sel).unwrap();
        let b = asymptotic_field(&g, kind, &sched, &params, &sel).unwrap();
        assert_eq!(a.values, b.values, "{kind}");
    }
    let x = at(f.domain(), 0.4, 0.55);
    assert_eq!(
        f.distortion_ratio(x, 0.1).unwrap(),
        g.distortion_ratio(x, 0.1).unwrap()
    );
}

#[test]
fn base_weight_with_unit_enlargement_reduces_to_plain_numbers() {
    let f = bent_map();
    let sched = schedule();
    let sel = Selection::Interior;
    let params = FieldParams::weighted(RadonWeight::base(), 1.0).with_exponent(2.0);
    let plain = FieldParams::default();
    let pairs = [
        (FieldKind::WeightedLip, FieldKind::LipUpper),
        (FieldKind::WeightedDistortion, FieldKind::DistortionUpper),
    ];
    for (weighted, kind) in pairs {
        let a = asymptotic_field(&f, weighted, &sched, &params, &sel).unwrap();
        let b = asymptotic_field(&f, kind, &sched, &plain, &sel).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.values, b.values, "{weighted}");
    }
}

#[test]
fn extra_weight_never_raises_weighted_numbers() {
    let f = bent_map();
    let sched = schedule();
    let sel = Selection::InteriorStride(3);
    let light = RadonWeight::base();
    let mut heavy = RadonWeight::with_density(
        (0..f.domain().len())
            .map(|i| 1.0 + f.domain().point(i)[0])
            .collect(),
    );
    heavy.add_mass_at(f.domain(), &[0.5, 0.5], 0.01);
    heavy.add_mass_at(f.domain(), &[0.45, 0.6], 0.3);
    assert!(heavy.dominates_base());
    for kind in [FieldKind::WeightedLip, FieldKind::WeightedDistortion] {
        for spread in [1.0, 2.0] {
            let lo = FieldParams::weighted(light.clone(), spread).with_exponent(2.0);
            let hi = FieldParams::weighted(heavy.clone(), spread).with_exponent(2.0);
            let a = asymptotic_field(&f, kind, &sched, &lo, &sel).unwrap();
            let b = asymptotic_field(&f, kind, &sched, &hi, &sel).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!(y <= x, "{kind} M={spread}: {y} > {x}");
            }
        }
    }
}

#[test]
fn weighted_kinds_validate_their_parameters() {
    let f = bent_map();
    let sched = schedule();
    let sel = Selection::Interior;
    assert!(asymptotic_field(&f, FieldKind::WeightedLip, &sched, &FieldParams::default(), &sel).is_err());
    let w = FieldParams::weighted(RadonWeight::base(), 0.5);
    assert!(asymptotic_field(&f, FieldKind::WeightedLip, &sched, &w, &sel).is_err());
    let w = FieldParams::weighted(RadonWeight::base(), 2.0);
    assert!(asymptotic_field(&f, FieldKind::WeightedDistortion, &sched, &w, &sel).is_err());
    let w = w.with_exponent(1.0);
    assert!(asymptotic_field(&f, FieldKind::WeightedDistortion, &sched, &w, &sel).is_err());
    let fine = RadiusSchedule::new(vec![0.02, 0.01], 2).unwrap();
    assert!(asymptotic_field(&f, FieldKind::LipUpper, &fine, &FieldParams::default(), &sel).is_err());
}

#[test]
fn csv_rows_round_trip_values() {
    let f = bent_map();
    let field = asymptotic_field(&f, FieldKind::LipUpper, &schedule(), &FieldParams::default(), &Selection::InteriorStride(40))
        .unwrap();
    let mut buf = Vec::new();
    field.write_csv(&f, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "point,x1,x2,value,spread,growth,diverging");
    for (pos, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[0].parse::<usize>().unwrap(), field.points[pos]);
        assert_eq!(cols[3].parse::<f64>().unwrap(), field.values[pos]);
    }
}

#[test]
fn mapping_file_rebuilds_the_same_mapping() {
    let f = bent_map();
    let file = MappingFile::from_mapping(&f);
    let g = file.into_mapping(square(), image_box()).unwrap();
    assert_eq!(f.values(), g.values());
    assert!(g.is_injective());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn both_numbers_grow_with_the_radius(
        x in 0usize..2500,
        r1 in 0.01f64..0.5,
        dr in 0.0f64..0.3,
    ) {
        let f = bent_map();
        let r2 = r1 + dr;
        prop_assert!(f.upper(x, r1).unwrap() <= f.upper(x, r2).unwrap());
        prop_assert!(f.lower(x, r1).unwrap() <= f.lower(x, r2).unwrap());
    }
}
