//! A piecewise map whose SA iterates fail to settle at either root.
//!
//! Four set-valued branches surround a square annulus and push clockwise;
//! elsewhere the field is a weak contraction `−0.005w`.

use crate::apps::Preset;
use crate::error::Result;
use crate::sa::{BiasModel, Drift, Problem, StepSchedule};
use crate::scalar::Scalar;
use crate::setvalued::{ConvexSet, SetValuedMap};

/// Region indices (in [`SetValuedMap::region_index`] numbering) of the four
/// branches around the annulus.
pub const ANNULUS_REGIONS: [usize; 4] = [1, 2, 3, 4];

fn boxed<T: Scalar>(lo: [f64; 2], hi: [f64; 2]) -> Result<ConvexSet<T>> {
    ConvexSet::boxed(vec![T::lit(lo[0]), T::lit(lo[1])], vec![T::lit(hi[0]), T::lit(hi[1])])
}

/// Fixed two-dimensional preset; roots `(0, 0)` and `(2, 2)`, start `(2, 2)`,
/// bias `N(0, I)`, `aₙ = 1/√(n+1)`. No discontinuity surfaces are declared:
/// the branch conditions are evaluated exactly as stated.
pub fn nonconvergence<T: Scalar>() -> Result<Preset<T>> {
    let l = |v: f64| T::lit(v);
    let map = SetValuedMap::builder("clockwise annulus", 2, l(5.0).sqrt())
        .region("corner (2,2)", move |w: &[T]| w[0] == l(2.0) && w[1] == l(2.0), |_| boxed([0.0, -2.0], [1.0, 1.0]))
        .region(
            "right",
            move |w: &[T]| l(1.0) <= w[0] && w[0] <= l(2.0) && l(-1.0) < w[1] && w[1] <= l(2.0),
            |_| boxed([0.0, -2.0], [0.0, -1.0]),
        )
        .region(
            "bottom",
            move |w: &[T]| l(-1.0) < w[0] && w[0] <= l(2.0) && l(-2.0) < w[1] && w[1] <= l(-1.0),
            |_| boxed([-2.0, 0.0], [-1.0, 0.0]),
        )
        .region(
            "left",
            move |w: &[T]| l(-2.0) < w[0] && w[0] <= l(-1.0) && l(-2.0) <= w[1] && w[1] < l(-1.0),
            |_| boxed([0.0, 1.0], [0.0, 2.0]),
        )
        .region(
            "top",
            move |w: &[T]| l(-2.0) <= w[0] && w[0] < l(1.0) && l(1.0) <= w[1] && w[1] <= l(2.0),
            |_| boxed([1.0, 0.0], [2.0, 0.0]),
        )
        .otherwise("contraction", move |w: &[T]| {
            Ok(ConvexSet::singleton(vec![l(-0.005) * w[0], l(-0.005) * w[1]]))
        });
    let drift = Drift::new(2).with_map(map.clone());
    let problem = Problem::new(drift, StepSchedule::power_law(T::one(), T::lit(0.5))?)
        .with_bias(BiasModel::gaussian_shrinking(2, T::one(), T::zero())?);
    let roots = vec![vec![T::zero(); 2], vec![l(2.0); 2]];
    Ok(Preset {
        name: "nonconv".into(),
        problem,
        x0: vec![l(2.0); 2],
        x_star: None,
        roots,
        note: "0 lies in the corner box at (2, 2) and the contraction vanishes at the origin".into(),
        mean_field: map,
        lyapunov: None,
        audit_box: (vec![l(-3.0); 2], vec![l(3.0); 2]),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_and_roots() {
        let p = nonconvergence::<f64>().unwrap();
        let m = &p.mean_field;
        assert!(m.evaluate(&[2.0, 2.0]).unwrap().contains(&[0.0, 0.0], 0.0).unwrap());
        assert!(m.evaluate(&[0.0, 0.0]).unwrap().contains(&[0.0, 0.0], 0.0).unwrap());
        assert_eq!(m.region_label(m.region_index(&[1.5, 0.0])), "right");
        assert_eq!(m.region_label(m.region_index(&[0.0, -1.5])), "bottom");
        assert_eq!(m.region_label(m.region_index(&[-1.5, -1.5])), "left");
        assert_eq!(m.region_label(m.region_index(&[0.0, 1.5])), "top");
        // The gap on the left side is not covered by any branch.
        assert_eq!(m.region_label(m.region_index(&[-1.5, 0.0])), "contraction");
        let idx: Vec<usize> = ["right", "bottom", "left", "top"]
            .iter()
            .map(|lab| (0..m.region_count()).find(|&i| m.region_label(i) == *lab).unwrap())
            .collect();
        assert_eq!(idx, ANNULUS_REGIONS.to_vec());
        assert_eq!(m.evaluate(&[2.0, 1.0]).unwrap(), boxed([0.0, -2.0], [0.0, -1.0]).unwrap());
    }
}
