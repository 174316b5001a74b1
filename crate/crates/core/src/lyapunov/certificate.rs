//! Grid certification of Lyapunov decay conditions.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::lyapunov::{u_generalized_derivative, Derivative, PiecewiseSmoothScalarFn};
use crate::scalar::Scalar;
use crate::setvalued::SetValuedMap;

/// Tolerance on `derivative ≤ bound`.
pub const PASS_TOL: f64 = 1e-9;

/// Regular grid on a box with a ball around `center` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    /// Points per axis (≥ 2).
    pub resolution: usize,
    pub center: Vec<T>,
    pub exclude_radius: T,
}

impl<T: Scalar> Grid<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>, resolution: usize, exclude_radius: T) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if resolution < 2 {
            return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidParameter("grid box needs lo < hi".into()));
        }
        if exclude_radius < T::zero() {
            return Err(Error::InvalidParameter("exclude radius must be nonnegative".into()));
        }
        let center = linalg::zeros(lo.len());
        Ok(Self { lo, hi, resolution, center, exclude_radius })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Grid points in lexicographic order (first coordinate slowest),
    /// excluding those within `exclude_radius` of `center`.
    pub fn points(&self) -> Vec<Vec<T>> {
        let d = self.dim();
        let n = self.resolution;
        let denom = T::from_usize(n - 1).unwrap_or_else(T::one);
        let total = n.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut x = vec![T::zero(); d];
            for k in (0..d).rev() {
                let i = rest % n;
                rest /= n;
                let frac = T::from_usize(i).unwrap_or_else(T::zero) / denom;
                x[k] = self.lo[k] + (self.hi[k] - self.lo[k]) * frac;
            }
            if linalg::dist(&x, &self.center) >= self.exclude_radius {
                out.push(x);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord<T> {
    pub x: Vec<T>,
    /// `None` when evaluation failed; see `error`.
    pub derivative: Option<Derivative<T>>,
    /// `−V̂₀(x)`.
    pub bound: T,
    pub pass: bool,
    pub error: Option<String>,
}

impl<T: Scalar> PointRecord<T> {
    /// `bound − derivative`; `+∞` for a `−∞` derivative.
    pub fn margin(&self) -> Option<T> {
        match self.derivative? {
            Derivative::Finite(v) => Some(self.bound - v),
            Derivative::NegInfinity => Some(T::infinity()),
        }
    }
}

/// Evidence for `V̇_𝒰^F(x) ≤ −V̂₀(x)` on a finite grid. Not a proof.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate<T> {
    pub v_name: String,
    pub map_name: String,
    pub u_names: Vec<String>,
    pub bound_name: String,
    pub grid: Grid<T>,
    pub records: Vec<PointRecord<T>>,
}

impl<T: Scalar> StabilityCertificate<T> {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Smallest finite margin (`+∞` when every derivative is `−∞`).
    pub fn min_margin(&self) -> T {
        self.records
            .iter()
            .map(|r| r.margin().unwrap_or_else(T::neg_infinity))
            .fold(T::infinity(), T::min)
    }

    pub fn failures(&self) -> Vec<&PointRecord<T>> {
        self.records.iter().filter(|r| !r.pass).collect()
    }

    pub fn neg_infinity_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.derivative.is_some_and(|d| d.is_neg_infinity()))
            .count()
    }

    /// Text report: a `#` header followed by one CSV record per grid point.
    pub fn to_report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# stability certificate");
        let _ = writeln!(s, "# V = {}", self.v_name);
        let _ = writeln!(s, "# U = [{}]", self.u_names.join(", "));
        let _ = writeln!(s, "# F = {}", self.map_name);
        let _ = writeln!(s, "# bound = -({})", self.bound_name);
        let _ = writeln!(
            s,
            "# grid lo = {} hi = {} resolution = {} exclude_radius = {:.16e}",
            fmt_vec(&self.grid.lo),
            fmt_vec(&self.grid.hi),
            self.grid.resolution,
            self.grid.exclude_radius
        );
        let _ = writeln!(s, "# points = {}", self.records.len());
        let _ = writeln!(s, "# neg_infinity = {}", self.neg_infinity_count());
        let _ = writeln!(s, "# failures = {}", self.failures().len());
        let _ = writeln!(s, "# min_margin = {:.16e}", self.min_margin());
        let _ = writeln!(s, "# passed = {}", self.passed());
        let cols: Vec<String> = (0..self.grid.dim()).map(|i| format!("x{i}")).collect();
        let _ = writeln!(s, "{},derivative,bound,pass", cols.join(","));
        for r in &self.records {
            let d = match (&r.derivative, &r.error) {
                (Some(d), _) => d.to_string(),
                (None, Some(e)) => format!("error: {}", e.replace(',', ";")),
                (None, None) => "error".to_string(),
            };
            let xs: Vec<String> = r.x.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{},{},{:.16e},{}", xs.join(","), d, r.bound, r.pass);
        }
        s
    }
}

impl<T: Scalar> fmt::Display for StabilityCertificate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_report())
    }
}

fn fmt_vec<T: Scalar>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
    format!("[{}]", parts.join(";"))
}

/// Evaluates `V̇_𝒰^F(x) ≤ −V̂₀(x)` at every grid point. Points are evaluated in
/// parallel; records keep grid order. Evaluation failures count as failed points.
pub fn certify_stability<T: Scalar>(
    v: &PiecewiseSmoothScalarFn<T>,
    us: &[PiecewiseSmoothScalarFn<T>],
    map: &SetValuedMap<T>,
    grid: &Grid<T>,
    bound: &PiecewiseSmoothScalarFn<T>,
) -> Result<StabilityCertificate<T>> {
    check_dim(map.dim(), grid.dim())?;
    check_dim(v.dim(), grid.dim())?;
    check_dim(bound.dim(), grid.dim())?;
    let tol = T::lit(PASS_TOL);
    let records = grid
        .points()
        .into_par_iter()
        .map(|x| {
            let b = match bound.value(&x) {
                Ok(b) => -b,
                Err(e) => {
                    return PointRecord { x, derivative: None, bound: T::nan(), pass: false, error: Some(e.to_string()) }
                }
            };
            match u_generalized_derivative(v, us, map, &x) {
                Ok(d) => PointRecord { pass: d.at_most(b, tol), x, derivative: Some(d), bound: b, error: None },
                Err(e) => PointRecord { x, derivative: None, bound: b, pass: false, error: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(StabilityCertificate {
        v_name: v.name().to_string(),
        map_name: map.name().to_string(),
        u_names: us.iter().map(|u| u.name().to_string()).collect(),
        bound_name: bound.name().to_string(),
        grid: grid.clone(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setvalued::PiecewiseField;

    #[test]
    fn grid_excludes_center() {
        let g = Grid::<f64>::new(vec![-1.0], vec![1.0], 5, 0.1).unwrap();
        assert_eq!(g.points(), vec![vec![-1.0], vec![-0.5], vec![0.5], vec![1.0]]);
        let g2 = Grid::<f64>::new(vec![0.0, 0.0], vec![1.0, 1.0], 2, 0.0).unwrap();
        assert_eq!(g2.points().len(), 4);
        assert_eq!(g2.points()[1], vec![0.0, 1.0]);
    }

    #[test]
    fn sliding_field_with_abs_bound() {
        // V = x², F = 𝒦[−sign], V̇ = −2|x| ≤ −|x|.
        let m = PiecewiseField::negative_sign().krasovskii_map("-sign", 1.0);
        let v = PiecewiseSmoothScalarFn::squared_norm(1);
        let b = PiecewiseSmoothScalarFn::abs_1d();
        let g = Grid::new(vec![-2.0], vec![2.0], 41, 0.0).unwrap();
        let c = certify_stability(&v, &[], &m, &g, &b).unwrap();
        assert!(c.passed());
        assert_eq!(c.records.len(), 41);
        assert!(c.min_margin() >= 0.0);
        let report = c.to_report();
        assert!(report.contains("# passed = true"));
        assert_eq!(report.lines().filter(|l| !l.starts_with('#')).count(), 42);
    }

    #[test]
    fn too_strong_bound_fails_as_data() {
        let m = PiecewiseField::negative_sign().krasovskii_map("-sign", 1.0);
        let v = PiecewiseSmoothScalarFn::squared_norm(1);
        let b = PiecewiseSmoothScalarFn::scaled_squared_norm(1, 10.0);
        let g = Grid::new(vec![-2.0], vec![2.0], 9, 0.0).unwrap();
        let c = certify_stability(&v, &[], &m, &g, &b).unwrap();
        assert!(!c.passed());
        assert!(c.min_margin() < 0.0);
    }
}
