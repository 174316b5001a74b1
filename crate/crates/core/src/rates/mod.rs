//! Rates of convergence: normalized iterates, tightness, the limiting
//! stochastic differential inclusion, and distributional comparisons.

mod diagnostics;
mod normalize;
mod sdi;

pub use diagnostics::{
    compare_to_sdi, ks_distance, outer_t_check, quantile, tightness_diagnostic, ContainmentRecord,
    ContainmentSide, OuterTReport, SdiComparison, TightnessReport, TightnessTrend, MIN_COMPARISON_ENSEMBLE,
    MIN_TIGHTNESS_ENSEMBLE,
};
pub use normalize::{normalize, NormalizedSeries};
pub use sdi::{classical_half_identity, simulate_sdi, simulate_sdi_ensemble, SdiModel};
