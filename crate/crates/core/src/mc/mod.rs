//! Input distributions, crude Monte Carlo and space-filling designs.

mod input;
mod lhs;
mod naive;

pub use input::{InputModel, Marginal, RngStream};
pub use lhs::{lhs_maximin, lhs_maximin_unit, lhs_unit, maximin_score, DEFAULT_RESTARTS};
pub use naive::{exceeds, naive_mc, NaiveMcResult};
