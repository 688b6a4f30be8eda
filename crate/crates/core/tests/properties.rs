use ellipsoid_vc::gmm::{build_mixture_shatter_witness, verify_mixture_shattering};
use ellipsoid_vc::realizability::Oracle;
use ellipsoid_vc::shattering::{build_shatter_witness, find_unrealizable_labeling, verify_shattering, ShatterMode};
use ellipsoid_vc::{PointSet, Tolerances};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn witnesses_certify_every_subset(d in 1usize..=3, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let w = build_shatter_witness(d, seed, &tol).unwrap();
        prop_assert!(w.delta > 0.0);
        w.verify(&tol).unwrap();
        prop_assert!(verify_shattering(&w.points, ShatterMode::Witness(&w)).unwrap().shattered);
    }

    #[test]
    fn random_sets_of_b_plus_one_are_refuted(d in 1usize..=2, seed in any::<u64>()) {
        let tol = Tolerances::default();
        let pts = PointSet::random_uniform(d, d * (d + 3) / 2 + 1, seed).unwrap();
        let c = find_unrealizable_labeling(&pts, &tol).unwrap();
        prop_assert!(c.confirmation.lp_margin <= tol.feasibility);
        c.verify(&tol).unwrap();
    }
}

#[test]
fn oracle_agrees_with_witness_on_planar_set() {
    let w = build_shatter_witness(2, 9, &Tolerances::default()).unwrap();
    let r = verify_shattering(&w.points, ShatterMode::Oracle(Oracle::default())).unwrap();
    assert!(r.shattered, "{:?}", r.failures);
}

#[test]
fn mixture_witness_survives_serialization() {
    let tol = Tolerances::default();
    let w = build_mixture_shatter_witness(1, 3, 4, &tol).unwrap();
    let text = serde_json::to_string(&w).unwrap();
    let back = serde_json::from_str(&text).unwrap();
    assert!(verify_mixture_shattering(&back, &tol).shattered);
}
