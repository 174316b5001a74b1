use proptest::prelude::*;
use sadi::lyapunov::{
    clarke_gradient, set_valued_derivative, u_generalized_derivative, u_reduced, Derivative, DerivativeSet,
    PiecewiseSmoothScalarFn,
};
use sadi::setvalued::{direction_family, ConvexSet, PiecewiseField, SetValuedMap};

fn sliding() -> SetValuedMap<f64> {
    PiecewiseField::negative_sign().krasovskii_map("-sign", 1.0)
}

/// 2-D map with kinks on both axes plus a rotation.
fn plane_map() -> SetValuedMap<f64> {
    let k = PiecewiseField::componentwise_sign(2, -1.0).krasovskii_map("-sign²", 2f64.sqrt());
    k.plus_field(std::sync::Arc::new(|w: &[f64]| vec![w[1] * 0.5, -w[0] * 0.5]), 3.0)
}

fn abs_sum() -> PiecewiseSmoothScalarFn<f64> {
    PiecewiseSmoothScalarFn::separable("|w1|+|w2|", vec![PiecewiseSmoothScalarFn::abs_1d(), PiecewiseSmoothScalarFn::abs_1d()])
        .unwrap()
}

fn on_grid() -> impl Strategy<Value = Vec<f64>> {
    // Quarter-unit lattice so kinks are sampled too.
    proptest::collection::vec((-8i32..=8).prop_map(|k| k as f64 * 0.25), 2)
}

#[test]
fn example_clarke_and_sign_oracles() {
    let pos = PiecewiseSmoothScalarFn::<f64>::positive_part_1d();
    let g = clarke_gradient(&pos, &[0.0]).unwrap();
    assert_eq!(g, ConvexSet::interval(0.0, 1.0).unwrap());
    let k = PiecewiseField::<f64>::negative_sign().krasovskii(&[0.0]).unwrap();
    assert_eq!(k, ConvexSet::interval(-1.0, 1.0).unwrap());
}

#[test]
fn sliding_example_closed_form_at_sampled_points() {
    let v = PiecewiseSmoothScalarFn::squared_norm(1);
    let u = PiecewiseSmoothScalarFn::positive_part_1d();
    let map = sliding();
    for i in 0..100 {
        let x = -2.0 + 4.0 * i as f64 / 99.0;
        let d = u_generalized_derivative(&v, std::slice::from_ref(&u), &map, &[x]).unwrap();
        assert_eq!(d, Derivative::Finite(-2.0 * x.abs()), "x = {x}");
    }
    let d0 = u_generalized_derivative(&v, &[u], &map, &[0.0]).unwrap();
    assert_eq!(d0, Derivative::Finite(0.0));
}

#[test]
fn set_valued_derivative_of_abs_along_sliding_map() {
    // V = |x|: at 0, ∂V = [−1, 1] forces q = 0, so the derivative set is {0}.
    let v = PiecewiseSmoothScalarFn::abs_1d();
    let d = set_valued_derivative(&v, &sliding(), &[0.0]).unwrap();
    assert_eq!(d, DerivativeSet::Interval { lo: 0.0, hi: 0.0 });
    let d = set_valued_derivative(&v, &sliding(), &[1.5]).unwrap();
    assert_eq!(d, DerivativeSet::Interval { lo: -1.0, hi: -1.0 });
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reduction_is_monotone(x in on_grid()) {
        let map = plane_map();
        let u1 = PiecewiseSmoothScalarFn::coordinate_sum(2);
        let u2 = abs_sum();
        let f = u_reduced(&map, &[], &x).unwrap().unwrap();
        let r1 = u_reduced(&map, std::slice::from_ref(&u2), &x).unwrap();
        let r2 = u_reduced(&map, &[u2.clone(), u1.clone()], &x).unwrap();
        let dirs = direction_family::<f64>(2, 128);
        match (r1, r2) {
            (None, Some(_)) => prop_assert!(false, "larger collection produced a nonempty set"),
            (Some(a), Some(b)) => {
                for p in &dirs {
                    prop_assert!(b.support(p).unwrap() <= a.support(p).unwrap() + 1e-9);
                    prop_assert!(a.support(p).unwrap() <= f.support(p).unwrap() + 1e-9);
                }
            }
            _ => {}
        }
    }

    #[test]
    fn empty_collection_is_identity(x in on_grid()) {
        let map = plane_map();
        let r = u_reduced(&map, &[], &x).unwrap().unwrap();
        prop_assert!(r.hausdorff(&map.evaluate(&x).unwrap(), 128).unwrap() == 0.0);
    }

    #[test]
    fn derivative_equals_support_for_smooth_v(x in on_grid()) {
        let map = plane_map();
        let v = PiecewiseSmoothScalarFn::squared_norm(2);
        let d = u_generalized_derivative(&v, &[], &map, &x).unwrap();
        let grad = v.gradient(&x).unwrap();
        let s = map.evaluate(&x).unwrap().support(&grad).unwrap();
        prop_assert_eq!(d, Derivative::Finite(s));
    }

    #[test]
    fn gradients_match_central_differences(x in proptest::collection::vec(-3.0..3.0f64, 2)) {
        prop_assume!(x.iter().all(|v| v.abs() > 1e-3 && (v.abs() - 1.0).abs() > 1e-3));
        let fns = [
            PiecewiseSmoothScalarFn::squared_norm(2),
            PiecewiseSmoothScalarFn::coordinate_sum(2),
            abs_sum(),
            PiecewiseSmoothScalarFn::separable(
                "dead zone",
                vec![
                    PiecewiseSmoothScalarFn::piecewise_linear_1d("dz", vec![-1.0, 1.0], vec![-1.0, 0.0, 1.0], 0.0).unwrap(),
                    PiecewiseSmoothScalarFn::positive_part_1d(),
                ],
            )
            .unwrap(),
        ];
        for f in &fns {
            let err = f.check_gradient(std::slice::from_ref(&x), 1e-6).unwrap();
            prop_assert!(err <= 1e-4, "{}: {err}", f.name());
        }
    }
}
