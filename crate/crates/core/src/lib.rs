//! Failure-probability estimation for expensive black-box functions with
//! Kriging surrogates.
//!
//! The posterior membership probability `p_n(x) = P(ξ_n(x) > T)` is evaluated
//! on a fixed Monte Carlo cloud. From it the crate derives the estimate `μ_n`,
//! the surrogate variable `R_n` (larger than the posterior failure volume in
//! convex order), quantile bounds and credible intervals, and the sequential
//! designs that shrink `Var[R_n]`.

pub mod bench;
pub mod error;
pub mod field;
pub mod gp;
pub mod mc;
pub mod optim;
pub mod oracle;
pub mod points;
pub mod stats;
pub mod sur;

pub use error::{Error, Result};
pub use oracle::Oracle;
pub use points::Points;
