//! Compact convex sets, set-valued maps, the Krasovskii operator and selectors.

mod convex;
mod field;
mod map;
mod select;

pub use convex::{direction_family, ConvexSet, Shape};
pub use field::{PieceClassifier, PieceFormula, PiecewiseField};
pub(crate) use field::{adjacent_pieces, as_f64};
pub use map::{
    Predicate, SampledRule, SampledSetMap, SetRule, SetValuedMap, SetValuedMapBuilder, Surface,
    VectorField,
};
pub use select::{select, CustomSelector, SelectorStrategy};

/// Default number of sampled directions for set comparisons.
pub const DEFAULT_DIRECTIONS: usize = 256;
