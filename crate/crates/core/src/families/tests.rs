use super::sampling::random_params_seeded;
use super::*;

fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

#[test]
fn every_family_builds_from_random_draws() {
    for tag in FamilyTag::ALL {
        for seed in 0..5 {
            let p = random_params_seeded(tag, seed);
            match build_family(&p, 1e-8) {
                Ok(t) => assert_eq!(t.meta.label.as_deref(), Some(tag.as_str())),
                Err(e) => panic!("{tag} seed {seed}: {e}\n{}", p.to_json()),
            }
        }
    }
}

#[test]
fn tag_round_trip() {
    for tag in FamilyTag::ALL {
        assert_eq!(tag.as_str().parse::<FamilyTag>().unwrap(), tag);
        let s = serde_json::to_string(&tag).unwrap();
        assert_eq!(s, format!("\"{}\"", tag.as_str()));
    }
    assert!(matches!("Q9".parse::<FamilyTag>(), Err(FamilyError::UnknownTag(_))));
}

#[test]
fn params_json_round_trip() {
    let p = random_params_seeded(FamilyTag::H2_4, 3);
    let q = FamilyParams::from_json(&p.to_json()).unwrap();
    assert_eq!(p, q);
    let bad = r#"{"tag": "Z1", "constants": {}, "interval": [0, 1]}"#;
    assert!(matches!(FamilyParams::from_json(bad), Err(FamilyError::UnknownTag(_))));
}

#[test]
fn p1_2_fixed_example() {
    let p = FamilyParams::new(FamilyTag::P1_2, iv(0.5, 2.0))
        .with("A", 1.0)
        .with("B", 0.0)
        .with("C", 0.0)
        .with("D", 1.0)
        .with("alpha", 1.0)
        .with("beta", 2.0)
        .with("beta1", 1.0)
        .with("beta2", 1.0);
    let t = build_family(&p, 1e-10).unwrap();
    assert_eq!(t.i, iv(0.5, 2.0));
    // F = 2 ln|2x + 2|
    assert!((t.big_f.eval(1.0) - 2.0 * 4f64.ln()).abs() < 1e-14);
}

#[test]
fn t_family_pi_shift_is_accepted() {
    let p = FamilyParams::new(FamilyTag::T3, iv(-0.3, 0.3))
        .with("A", 1.0)
        .with("B", 0.5)
        .with("C", 0.2)
        .with("D", 1.0)
        .with("T", 2.0)
        .with("alpha", 1.0)
        .with("beta", 0.1)
        .with("beta1", 0.1 + std::f64::consts::PI)
        .with("beta2", 0.0);
    assert!(validate_params(&p).ok);
    build_family(&p, 1e-9).unwrap();
}

#[test]
fn violations_are_reported() {
    let mut p = random_params_seeded(FamilyTag::P2_1, 1);
    p.set("A1", p.get("A1") + 1e-3);
    let v = validate_params(&p);
    assert!(!v.ok);
    assert!(v.violations.iter().any(|v| v.constraint.contains("A1") && v.magnitude > 1e-6));
    assert!(matches!(build_family(&p, 1e-8), Err(FamilyError::ConstraintViolated(_))));

    let mut t = random_params_seeded(FamilyTag::T1, 1);
    t.set("T", 1.5);
    assert!(!validate_params(&t).ok);

    let mut h = random_params_seeded(FamilyTag::H1_1, 2);
    h.set("tau", 1.0);
    let v = validate_params(&h);
    assert!(v.violations.iter().any(|v| v.constraint.contains("derived")));

    let mut m = random_params_seeded(FamilyTag::H2_1, 2);
    m.constants.remove("gamma");
    assert!(validate_params(&m).violations[0].constraint.contains("missing"));
}

#[test]
fn unsafe_domain_is_reported() {
    // ln|2x + 2| with a singularity at -1, seeded right next to it
    let p = FamilyParams::new(FamilyTag::P1_2, iv(-1.0 - 1e-5, -1.0 + 1e-5))
        .with("A", 1.0)
        .with("B", 0.0)
        .with("C", 0.0)
        .with("D", 1.0)
        .with("alpha", 1.0)
        .with("beta", 2.0)
        .with("beta1", 1.0)
        .with("beta2", 1.0);
    let opts = BuildOptions { seed: Some(-1.0 + 5e-6), ..Default::default() };
    assert!(matches!(build_family_with(&p, 1e-8, &opts), Err(FamilyError::UnsafeDomain { .. })));
}

#[test]
fn sign_resolved_g_is_recorded() {
    let p = random_params_seeded(FamilyTag::P2_2, 4);
    let t = build_family(&p, 1e-8).unwrap();
    assert!(t.meta.notes.iter().any(|n| n.starts_with("G variant")));
}

#[test]
fn derived_constants() {
    let p = FamilyParams::new(FamilyTag::T1, iv(0.0, 1.0)).with("T", 0.6);
    let d = p.derived();
    assert!((d["tau"] - 0.5).abs() < 1e-15);
    assert!((d["Tstar"] - 1.25).abs() < 1e-15);
}
