//! The stochastic approximation engine.

mod drift;
mod engine;
mod noise;
mod projection;
mod schedule;
mod streams;
mod trajectory;

pub use drift::{Drift, ExogenousFn, PerturbationFn, SetPart, SmoothFn};
pub use engine::{audit_decomposition, Problem};
pub use noise::{BiasModel, NoiseModel, Sampler};
pub use projection::ProjectionRegion;
pub use schedule::{StepRule, StepSchedule};
pub use streams::{derive_key, splitmix64, Role, Streams};
pub use trajectory::{InterpolationMode, RecordMode, StepLog, Trajectory};
pub(crate) use trajectory::fmt as fmt_scalar;
