use matkowski::classify::{affine_fraction, classify_tuple, Branch};
use matkowski::families::sampling::random_params_seeded;
use matkowski::families::{build_family, FamilyParams, FamilyTag};
use matkowski::means::{classical_triple, compose_generators, eq1_residual, invariance_residual, COMPOSE_TOL};
use matkowski::reduction::{anchors_from, derive_system, reconstruct_tuple, tuple_distance};
use matkowski::{Grid, Interval};

#[test]
fn classical_fixture_end_to_end() {
    let dom = Interval::new(0.5, 4.0).unwrap();
    let (m, n, k) = classical_triple(dom).unwrap();
    let r = invariance_residual(&m, &n, &k, &Grid::uniform(dom, 30).unwrap()).unwrap();
    assert!(r.max_abs < 1e-9);
    let t = compose_generators(&m, &n, &k, COMPOSE_TOL).unwrap();
    let e = eq1_residual(&t, &Grid::chebyshev(t.i, 30).unwrap()).unwrap();
    assert!(e.max_abs < 1e-9);
}

#[test]
fn reconstruction_round_trip_per_class() {
    for tag in [FamilyTag::T1, FamilyTag::P1_3, FamilyTag::H2_2] {
        let t = build_family(&random_params_seeded(tag, 11), 1e-8).unwrap();
        let s = derive_system(&t).unwrap();
        let r = reconstruct_tuple(&s, &anchors_from(&t, t.i.midpoint())).unwrap();
        let w = t.i.width();
        let inner = Interval::new(t.i.lo() + 0.1 * w, t.i.hi() - 0.1 * w).unwrap();
        let d = tuple_distance(&t, &r, &Grid::uniform(inner, 25).unwrap());
        assert!(d < 1e-5, "{tag}: {d}");
    }
}

#[test]
fn branches_and_dichotomy() {
    let a = build_family(&random_params_seeded(FamilyTag::Main1AffineF, 2), 1e-8).unwrap();
    let r = classify_tuple(&a).unwrap();
    assert_eq!(r.branch, Branch::A);
    assert_eq!(affine_fraction(&a.big_f, &Grid::chebyshev(a.i, 30).unwrap()).unwrap(), 1.0);

    let b1 = build_family(&random_params_seeded(FamilyTag::Main1AffineG, 2), 1e-8).unwrap();
    assert_eq!(classify_tuple(&b1).unwrap().branch, Branch::B1);

    let h = build_family(&random_params_seeded(FamilyTag::H1_1, 2), 1e-8).unwrap();
    let r = classify_tuple(&h).unwrap();
    assert_eq!(r.branch, Branch::B2Hyperbolic);
    assert!(affine_fraction(&h.big_f, &Grid::chebyshev(h.i, 30).unwrap()).unwrap() < 0.05);
}

#[test]
fn recovered_params_rebuild_the_input() {
    let t = build_family(&random_params_seeded(FamilyTag::P1_4, 8), 1e-8).unwrap();
    let guess: FamilyParams = classify_tuple(&t).unwrap().family_guess.unwrap();
    let again = build_family(&guess, 1e-8).unwrap();
    let d = tuple_distance(&t, &again, &Grid::chebyshev(t.i, 20).unwrap());
    assert!(d < 1e-6, "{d}");
}
