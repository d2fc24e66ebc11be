use std::sync::Arc;

use mapping_numbers::{MappingFile, RadonWeight};
use regularity_certify::Theorem;
use scenarios::{
    generate, reproduce, strip_jump, Comparator, Params, Quantity, ScenarioError, ScenarioName,
};

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

#[test]
fn regeneration_is_bit_identical() {
    for name in ScenarioName::ALL {
        let a = generate(name, &Params::default()).unwrap();
        let b = generate(name, &Params::default()).unwrap();
        assert_eq!(bits(a.mapping.values()), bits(b.mapping.values()), "{name}");
        assert_eq!(bits(a.domain().coords()), bits(b.domain().coords()), "{name}");
        assert_eq!(
            serde_json::to_string(&a.weight).unwrap(),
            serde_json::to_string(&b.weight).unwrap()
        );
        assert_eq!(
            serde_json::to_string(&a.manifest()).unwrap(),
            serde_json::to_string(&b.manifest()).unwrap()
        );
    }
}

#[test]
fn names_round_trip() {
    for name in ScenarioName::ALL {
        assert_eq!(name.id().parse::<ScenarioName>().unwrap(), name);
    }
    assert!(matches!(
        "spiral".parse::<ScenarioName>(),
        Err(ScenarioError::Unknown(_))
    ));
}

#[test]
fn expectations_refer_to_existing_runs() {
    for name in ScenarioName::ALL {
        let s = generate(name, &Params::default()).unwrap();
        assert!(!s.expectations.is_empty(), "{name}");
        assert!(!s.runs.is_empty(), "{name}");
        for e in &s.expectations {
            let theorem = match &e.quantity {
                Quantity::Verdict { theorem }
                | Quantity::MaxEnergy { theorem }
                | Quantity::WindowEnergyRatio { theorem, .. }
                | Quantity::EquiDecays { theorem }
                | Quantity::CurvePassFraction { theorem }
                | Quantity::SweepMinimum { theorem } => Some(*theorem),
                Quantity::SegmentInLipschitzPart
                | Quantity::FarInDistortionPart
                | Quantity::JumpMassRatio { .. } => Some(Theorem::Bv),
                _ => None,
            };
            if let Some(t) = theorem {
                assert!(s.run(t).is_some(), "{name}: {} needs a {t} run", e.label);
            }
        }
        let manifest = serde_json::to_string(&s.manifest()).unwrap();
        let back: scenarios::ScenarioManifest = serde_json::from_str(&manifest).unwrap();
        assert_eq!(back, s.manifest());
    }
}

#[test]
fn strips_refuse_unresolved_widths() {
    let coarse = Params {
        resolution: Some(0.01),
        ..Params::default()
    };
    match generate(ScenarioName::Strips, &coarse) {
        Err(ScenarioError::TooCoarse { resolution, strips }) => {
            assert_eq!(resolution, 0.01);
            assert_eq!(strips, 12);
        }
        other => panic!("expected TooCoarse, got {:?}", other.map(|s| s.name)),
    }
    let few = Params {
        resolution: Some(0.01),
        strips: 4,
        ..Params::default()
    };
    let s = generate(ScenarioName::Strips, &few).unwrap();
    assert_eq!(s.domain().len(), 200 * 100);
}

#[test]
fn strip_jumps_match_reflection() {
    let s = generate(
        ScenarioName::Strips,
        &Params {
            resolution: Some(0.005),
            strips: 6,
            ..Params::default()
        },
    )
    .unwrap();
    let d = s.domain();
    // across x1 = 1/3 the right side is reflected
    let row = 0.5025;
    let find = |x1: f64| {
        (0..d.len())
            .find(|&i| (d.point(i)[0] - x1).abs() < 1e-9 && (d.point(i)[1] - row).abs() < 1e-9)
            .unwrap()
    };
    let left = s.mapping.value(find(0.3325));
    let right = s.mapping.value(find(0.3375));
    assert!((left[0] - 0.3325).abs() < 1e-12);
    assert!((right[0] - (2.0 - 0.3375)).abs() < 1e-12);
    let gap = right[0] - left[0];
    assert!((gap - strip_jump(3)).abs() < 0.011, "{gap}");
}

#[test]
fn invalid_parameters_are_reported() {
    let bad = [
        (ScenarioName::Identity, Params { resolution: Some(-1.0), ..Params::default() }),
        (ScenarioName::Scaling, Params { scale: 0.0, ..Params::default() }),
        (ScenarioName::Dirac, Params { masses: vec![], ..Params::default() }),
        (ScenarioName::Dirac, Params { masses: vec![(1.5, 1.0)], ..Params::default() }),
        (ScenarioName::Jumpset, Params { segments: vec![0.4, 0.5], ..Params::default() }),
        (ScenarioName::Jumpset, Params { cusp_exponent: 1.0, ..Params::default() }),
        (ScenarioName::Strips, Params { strips: 1, ..Params::default() }),
    ];
    for (name, params) in bad {
        assert!(
            matches!(generate(name, &params), Err(ScenarioError::InvalidParameter(_))),
            "{name} {params:?}"
        );
    }
}

#[test]
fn params_reject_unknown_keys() {
    let p: Params = serde_json::from_str(r#"{"strips": 8}"#).unwrap();
    assert_eq!(p.strips, 8);
    assert_eq!(p.scale, 2.0);
    assert!(serde_json::from_str::<Params>(r#"{"stripes": 8}"#).is_err());
}

#[test]
fn dirac_mass_sits_on_one_row() {
    let s = generate(ScenarioName::Dirac, &Params::default()).unwrap();
    let d = s.domain();
    let masses = s.weight.masses(d).unwrap();
    let extra: f64 = masses.iter().zip(d.weights()).map(|(k, m)| k - m).sum();
    assert!((extra - 1.0).abs() < 1e-9, "{extra}");
    let rows: Vec<f64> = (0..d.len())
        .filter(|&i| masses[i] > d.weight(i) * 1.5)
        .map(|i| d.point(i)[1])
        .collect();
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|&y| (y - 0.5).abs() < 1e-12));
}

#[test]
fn assets_load_back() {
    let s = generate(ScenarioName::Jumpset, &Params::default()).unwrap();
    let dir = std::env::temp_dir().join(format!("scenario-assets-{}", std::process::id()));
    let paths = s.write_assets(&dir).unwrap();
    let domain = Arc::new(space_core::io::load(&paths[0]).unwrap());
    let target = Arc::new(space_core::io::load(&paths[1]).unwrap());
    let file: MappingFile =
        serde_json::from_str(&std::fs::read_to_string(&paths[2]).unwrap()).unwrap();
    let mapping = file.into_mapping(domain, target).unwrap();
    assert_eq!(bits(mapping.values()), bits(s.mapping.values()));
    assert!(mapping.is_injective());
    let weight: RadonWeight =
        serde_json::from_str(&std::fs::read_to_string(&paths[3]).unwrap()).unwrap();
    assert_eq!(weight, s.weight);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn smooth_scenarios_reproduce() {
    for name in [ScenarioName::Identity, ScenarioName::Scaling, ScenarioName::Constant] {
        let s = generate(name, &Params::default()).unwrap();
        let report = reproduce(&s).unwrap();
        for c in &report.checks {
            assert!(c.pass, "{name}: {} measured {}", c.label, c.measured);
        }
        assert!(report.pass);
    }
}

#[test]
fn dirac_reproduces() {
    let s = generate(ScenarioName::Dirac, &Params::default()).unwrap();
    let report = reproduce(&s).unwrap();
    for c in &report.checks {
        assert!(c.pass, "{} measured {}", c.label, c.measured);
    }
}

#[test]
fn report_values_are_recorded_but_never_fail() {
    assert!(Comparator::Report.holds(f64::NAN));
    assert!(Comparator::AtMost(1.0).holds(1.0));
    assert!(!Comparator::AtLeast(1.0).holds(f64::NAN));
    assert!(!Comparator::Equals(0.0).holds(1e-300));
}
