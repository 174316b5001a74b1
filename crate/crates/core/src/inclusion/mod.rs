//! Differential inclusions: Euler integration with selectors and an ε-chain diagnostic.

mod chain;
mod integrate;

pub use chain::{epsilon_chain_diagnostic, ChainOutcome, ChainReport, ChainSearch};
pub use integrate::{integrate, integrate_projected, CrossingEvent, InclusionPath};
