use std::sync::Arc;

use mapping_numbers::{RadonWeight, SampledMapping};
use regularity_certify::{
    build_cover, certify, image_volume, modulus_vanishing, null_set_check, CertifyConfig, Part,
    Theorem,
};
use space_core::MetricMeasureSpace;

fn square(h: f64) -> Arc<MetricMeasureSpace> {
    Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[1.0, 1.0], h).unwrap())
}

fn linear(scale: f64) -> SampledMapping {
    let d = square(0.02);
    let t = Arc::new(MetricMeasureSpace::uniform_grid(&[0.0, 0.0], &[3.0, 3.0], 0.02).unwrap());
    SampledMapping::from_fn(d, t, true, move |x| vec![scale * x[0], scale * x[1]]).unwrap()
}

fn config(theorem: Theorem) -> CertifyConfig {
    CertifyConfig {
        theorem,
        p: 1.5,
        levels: vec![8, 16],
        curves: 16,
        ..CertifyConfig::default()
    }
}

#[test]
fn identity_passes_every_route() {
    let m = linear(1.0);
    for t in Theorem::ALL {
        let cert = certify(&m, &RadonWeight::base(), &config(t)).unwrap();
        assert!(cert.verdict.pass, "{t}: {:?}", cert.verdict.reasons);
        assert_eq!(cert.partition.n, 0);
        assert!(cert.curves.pass_fraction == 1.0);
        if t != Theorem::SobolevCritical {
            assert_eq!(cert.curves.curves, 16, "{}", cert.curves.note);
        }
        assert!(cert.null_set.holds);
    }
}

#[test]
fn scaling_doubles_the_energy() {
    let one = certify(&linear(1.0), &RadonWeight::base(), &config(Theorem::Bv)).unwrap();
    let two = certify(&linear(2.0), &RadonWeight::base(), &config(Theorem::Bv)).unwrap();
    assert_eq!(one.partition, two.partition);
    for (a, b) in one.energies.iter().zip(&two.energies) {
        assert!((b.energy / a.energy - 2.0).abs() < 1e-9, "{} {}", a.energy, b.energy);
    }
    assert!(two.verdict.pass);
}

#[test]
fn constant_map_has_zero_energy() {
    let d = square(0.02);
    let m = SampledMapping::from_fn(d.clone(), d, false, |_| vec![0.3, 0.7]).unwrap();
    let cert = certify(&m, &RadonWeight::base(), &config(Theorem::Bv)).unwrap();
    assert!(cert.verdict.pass, "{:?}", cert.verdict.reasons);
    assert_eq!(cert.partition.a, cert.partition.evaluated);
    assert!(cert.energies.iter().all(|e| e.energy == 0.0));
    assert!(certify(&m, &RadonWeight::base(), &config(Theorem::SobolevDistortion)).is_err());
}

#[test]
fn segment_cover_has_bounded_overlap() {
    let d = square(0.01);
    let segment: Vec<usize> = (0..d.len())
        .filter(|&i| {
            let x = d.point(i);
            (x[1] - 0.505).abs() < 1e-9 && x[0] > 0.205 && x[0] < 0.795
        })
        .collect();
    assert!(segment.len() > 50);
    let c = build_cover(&d, &segment, 10, 1.0, Part::A, 5.0).unwrap();
    assert!((5..=21).contains(&c.centers.len()), "{}", c.centers.len());
    assert!(c.overlap_double <= 5);
    assert!(c.within_target);
    for &x in &segment {
        assert!(c.centers.iter().any(|&k| d.distance(k, x) < c.radius));
    }
    for (k, &a) in c.centers.iter().enumerate() {
        for &b in &c.centers[k + 1..] {
            assert!(d.distance(a, b) >= c.radius);
        }
    }
}

#[test]
fn image_volume_of_identity_square() {
    // unit square thickened by 0.1: 1 + 4 * 0.1 + pi * 0.01
    let d = square(0.01);
    let t = Arc::new(MetricMeasureSpace::uniform_grid(&[-0.5, -0.5], &[1.5, 1.5], 0.004).unwrap());
    let m = SampledMapping::from_fn(d.clone(), t, true, |x| x.to_vec()).unwrap();
    let all: Vec<usize> = (0..d.len()).collect();
    let v = image_volume(&m, &all, 0.1).unwrap();
    let exact = 1.4 + std::f64::consts::PI * 0.01;
    assert!((v.volume - exact).abs() < 0.02, "{}", v.volume);
}

#[test]
fn critical_identity_with_weight() {
    let m = linear(1.0);
    let n = m.domain().len();
    let density: Vec<f64> = (0..n).map(|i| 1.0 + m.domain().point(i)[0]).collect();
    let w = RadonWeight::with_density(density);
    let cert = certify(&m, &w, &config(Theorem::SobolevCritical)).unwrap();
    let c = cert.critical.as_ref().unwrap();
    assert_eq!(c.q, 2.0);
    assert!(c.comparison_holds);
    assert!(c.lip_energy > 0.0 && c.lip_energy <= c.bound);
    assert!((c.a_sup - 1.99).abs() < 1e-12, "{}", c.a_sup);
    assert_eq!(cert.bound.value(), c.bound);
    assert!(cert.verdict.pass, "{:?}", cert.verdict.reasons);
}

#[test]
fn exceptional_line_fails_the_null_set_check() {
    let d = square(0.01);
    let line: Vec<usize> = (0..d.len())
        .filter(|&i| {
            let x = d.point(i);
            (x[0] - 0.505).abs() < 1e-9 && x[1] > 0.2 && x[1] < 0.8
        })
        .collect();
    let r = null_set_check(&d, &line, 1.0, 0.05, 0).unwrap();
    assert!(!r.holds);
    assert!(r.content.unwrap() > 0.05);
    let r = null_set_check(&d, &[], 1.0, 0.05, 0).unwrap();
    assert!(r.holds);
}

#[test]
fn segment_in_a_cube_has_vanishing_modulus() {
    let d = MetricMeasureSpace::uniform_grid(&[0.3, 0.3, 0.3], &[0.7, 0.7, 0.7], 0.008).unwrap();
    let segment: Vec<usize> = (0..d.len())
        .filter(|&i| {
            let x = d.point(i);
            (x[1] - 0.504).abs() < 1e-9 && (x[2] - 0.504).abs() < 1e-9 && x[0] > 0.44 && x[0] < 0.56
        })
        .collect();
    assert!(!segment.is_empty());
    let floor = d.trusted_floor();
    for eps in [0.2, 0.05] {
        let mv = modulus_vanishing(&d, &segment, 1.0, eps, 4.0 * floor, 3, 16, 3, false).unwrap();
        assert!(mv.energy_within_bound, "eps {eps}: {} > {}", mv.energy, mv.energy_bound);
        assert!(mv.all_admissible, "eps {eps}: {}", mv.min_integral);
        assert!(mv.energy <= 16.0 * eps);
    }
}
