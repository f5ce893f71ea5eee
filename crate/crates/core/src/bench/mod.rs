//! Test problems, brute-force reference computations and experiment drivers.

pub mod experiments;
pub mod problems;
pub mod reference;

pub use problems::BuiltinProblem;
