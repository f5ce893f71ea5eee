//! Estimators, bounds and intervals derived from the membership probability.

mod bounds;
mod cloud;
mod groups;
mod report;
mod sampling;

pub use bounds::{
    credible_cx, credible_markov, cx_bounds, markov_bounds, BetaChoice, CredibleInterval,
    QuantileBounds, DEFAULT_ALPHAS,
};
pub use cloud::{
    build_cloud, cloud_probs, membership_prob, observed_floor, plugin_estimate, prepared_probs,
    prob_from_moments, union_prob, SampleCloud,
};
pub use groups::ProbGroups;
pub use report::{FailureReport, ReportConfig};
pub use sampling::{rn_at, sample_rn, sample_sn_grid};
