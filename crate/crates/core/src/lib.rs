//! Stochastic approximation with discontinuous dynamics and set-valued limits.
//!
//! The crate is organised bottom-up:
//!
//! * [`setvalued`]: compact convex sets, piecewise set-valued maps, the
//!   Krasovskii operator and selectors.
//! * [`lyapunov`]: Clarke gradients, set-valued and `𝒰`-generalized
//!   derivatives, and grid certification of Lyapunov decay.
//! * [`sa`]: the stochastic approximation recursion (plain and projected),
//!   step schedules, noise and bias models, trajectories and interpolation.
//! * [`inclusion`]: explicit Euler integration of differential inclusions and
//!   an ε-chain recurrence diagnostic.
//! * [`rates`]: normalized iterates, tightness, simulation of the limiting
//!   stochastic differential inclusion and distributional comparisons.
//! * [`apps`]: ready-made problem presets (Lasso, Pegasos, set-valued root
//!   finding, sign-error filtering and a non-convergent example).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); `f64` aliases
//! are provided at the crate root.

pub mod apps;
pub mod error;
pub mod inclusion;
pub mod linalg;
pub mod lyapunov;
pub mod rates;
pub mod sa;
pub mod scalar;
pub mod setvalued;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ConvexSetF64 = setvalued::ConvexSet<f64>;
pub type SetValuedMapF64 = setvalued::SetValuedMap<f64>;
pub type PiecewiseFieldF64 = setvalued::PiecewiseField<f64>;
pub type SelectorF64 = setvalued::SelectorStrategy<f64>;
pub type MatrixF64 = linalg::Matrix<f64>;

pub type ConvexSetF32 = setvalued::ConvexSet<f32>;
pub type DriftF64 = sa::Drift<f64>;
pub type ProblemF64 = sa::Problem<f64>;
pub type TrajectoryF64 = sa::Trajectory<f64>;
pub type ScalarFnF64 = lyapunov::PiecewiseSmoothScalarFn<f64>;
pub type CertificateF64 = lyapunov::StabilityCertificate<f64>;
pub type InclusionPathF64 = inclusion::InclusionPath<f64>;
pub type SdiModelF64 = rates::SdiModel<f64>;
pub type NormalizedSeriesF64 = rates::NormalizedSeries<f64>;
pub type PresetF64 = apps::Preset<f64>;
