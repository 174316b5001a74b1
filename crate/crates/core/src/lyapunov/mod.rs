//! Nonsmooth Lyapunov analysis: Clarke gradients, set-valued and
//! `𝒰`-generalized derivatives, and grid certification of decay conditions.

mod calculus;
mod certificate;
mod scalar_fn;

pub use calculus::{
    clarke_gradient, constancy_subset, set_valued_derivative, u_generalized_derivative, u_reduced,
    Derivative, DerivativeSet,
};
pub use certificate::{certify_stability, Grid, PointRecord, StabilityCertificate, PASS_TOL};
pub use scalar_fn::PiecewiseSmoothScalarFn;
