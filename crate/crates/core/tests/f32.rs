use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sadi::apps::{lasso, rootfind, LassoData};
use sadi::inclusion::integrate;
use sadi::sa::RecordMode;
use sadi::setvalued::{ConvexSet, PiecewiseField, SelectorStrategy};

#[test]
fn convex_sets_in_f32() {
    let b = sadi::ConvexSetF32::boxed(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
    assert_eq!(b.support(&[1.0, 1.0]).unwrap(), 3.0);
    assert!(b.contains(&[0.5, 1.5], 1e-6).unwrap());
    let ball = ConvexSet::<f32>::ball(vec![0.0, 0.0], 1.0).unwrap();
    assert!((ball.distance(&[3.0, 4.0]).unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn lasso_runs_in_f32() {
    let p = lasso::<f32>(0.7, LassoData::scalar_shift(1.0, 1.0)).unwrap();
    assert!((p.x_star.as_ref().unwrap()[0] - 0.3).abs() < 1e-6);
    let tr = p.problem.run(&p.x0, 20_000, 1, 0, 0, RecordMode::Final).unwrap();
    assert!((tr.final_state()[0] - 0.3).abs() < 0.2);
}

#[test]
fn rootfind_certifies_in_f32() {
    let p = rootfind::<f32>().unwrap();
    assert!(p.root_check(1e-5).unwrap());
    assert!(p.certify().unwrap().passed());
}

#[test]
fn sliding_in_f32() {
    let m = PiecewiseField::<f32>::negative_sign().krasovskii_map("-sign", 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = integrate(&m, None, &[1.0], 1e-2, 2.0, &SelectorStrategy::LeastNorm, &mut rng).unwrap();
    assert!(p.final_state()[0].abs() <= 1e-2);
}
