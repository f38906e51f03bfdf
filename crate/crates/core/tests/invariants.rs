//! Invariants of the public API on randomly drawn operators.

use numindex_core::constants::{compute_mp, MP_TOL};
use numindex_core::radii::{all_radii, estimate, Objective, SolverConfig};
use numindex_core::theorem::{build_certificate_thm1, default_t_grid};
use numindex_core::{Field, LpSpace, Operator};
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig::default().with_restarts(12)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![1.1..1.9, 2.1..6.0]
}

fn real_problem() -> impl Strategy<Value = (LpSpace, Operator)> {
    (exponent(), 2usize..=4).prop_flat_map(|(p, m)| {
        (
            proptest::collection::vec(0.25..4.0f64, m),
            proptest::collection::vec(proptest::collection::vec(-2.0..2.0f64, m), m),
        )
            .prop_map(move |(w, rows)| (LpSpace::new(p, w).unwrap(), Operator::real(rows).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn radii_are_ordered((space, t) in real_problem()) {
        let r = all_radii(&space, &t, &cfg(), &[]).unwrap();
        prop_assert!(r.ordered(1e-9));
        let abs = r.abs_num_radius.unwrap().value;
        prop_assert!(r.num_radius.value <= abs + 1e-9 && abs <= r.op_norm.value + 1e-9);
    }

    #[test]
    fn radii_are_absolutely_homogeneous((space, t) in real_problem(), c in -3.0..3.0f64) {
        prop_assume!(c.abs() > 0.1);
        let cfg = cfg();
        for obj in Objective::ALL {
            let first = estimate(&space, &t, obj, &cfg, &[]).unwrap();
            let scaled = estimate(&space, &t.scale(c), obj, &cfg, std::slice::from_ref(&first.witness)).unwrap();
            let base = estimate(&space, &t, obj, &cfg, std::slice::from_ref(&scaled.witness)).unwrap();
            prop_assert!((scaled.value - c.abs() * base.value).abs() <= 1e-9 * (1.0 + scaled.value), "{obj:?}");
        }
    }

    #[test]
    fn uniform_weight_scaling_changes_nothing((space, t) in real_problem(), s in 0.2..5.0f64) {
        let scaled = LpSpace::new(space.p(), space.weights().iter().map(|w| w * s).collect()).unwrap();
        let cfg = cfg();
        for obj in Objective::ALL {
            let a = estimate(&space, &t, obj, &cfg, &[]).unwrap();
            let b = estimate(&scaled, &t, obj, &cfg, std::slice::from_ref(&a.witness)).unwrap();
            let a2 = estimate(&space, &t, obj, &cfg, std::slice::from_ref(&b.witness)).unwrap();
            prop_assert!((a2.value - b.value).abs() <= 1e-8 * (1.0 + a2.value), "{obj:?}");
        }
    }

    #[test]
    fn certificate_bound_never_exceeds_v((space, t) in real_problem()) {
        let cfg = cfg();
        let abs = estimate(&space, &t, Objective::AbsNumRadius, &cfg, &[]).unwrap();
        let c = build_certificate_thm1(&space, &t, &abs.witness, &default_t_grid(space.p()).unwrap()).unwrap();
        let v = estimate(&space, &t, Objective::NumRadius, &cfg, std::slice::from_ref(&c.constructive_point)).unwrap();
        prop_assert!(c.best_bound <= c.constructive_v + 1e-12);
        prop_assert!(c.constructive_v <= v.value + 1e-12);
        prop_assert!(c.best_bound >= c.third_beta_mp - 1e-12);
    }

    #[test]
    fn mp_is_symmetric_under_conjugation(p in 1.05..8.0f64) {
        let q = p / (p - 1.0);
        let a = compute_mp(p, MP_TOL).unwrap().value;
        let b = compute_mp(q, MP_TOL).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn permuting_coordinates_with_weights_preserves_radii() {
    let space = LpSpace::new(2.7, vec![0.5, 2.0, 1.0]).unwrap();
    let t = Operator::real(vec![vec![1.0, -2.0, 0.5], vec![0.0, 0.3, 1.0], vec![-1.0, 0.0, 0.2]]).unwrap();
    let perm = [2, 0, 1];
    let pw: Vec<f64> = perm.iter().map(|&i| space.weights()[i]).collect();
    let pt: Vec<Vec<f64>> = perm
        .iter()
        .map(|&i| perm.iter().map(|&k| t.entry(i, k).re).collect())
        .collect();
    let (ps, pt) = (LpSpace::new(2.7, pw).unwrap(), Operator::real(pt).unwrap());
    let cfg = SolverConfig::default();
    for obj in Objective::ALL {
        let a = estimate(&space, &t, obj, &cfg, &[]).unwrap().value;
        let b = estimate(&ps, &pt, obj, &cfg, &[]).unwrap().value;
        assert!((a - b).abs() < 1e-8, "{obj:?}: {a} vs {b}");
    }
    let c = estimate(&space, &t.to_complex(), Objective::NumRadius, &cfg, &[])
        .unwrap()
        .value;
    let d = estimate(&ps, &pt.to_complex(), Objective::NumRadius, &cfg, &[])
        .unwrap()
        .value;
    assert!((c - d).abs() < 1e-8);
    assert_eq!(t.to_complex().field(), Field::Complex);
}
