//! Sequential design: one-step lookahead criteria and the enrichment loop.

mod criteria;
mod engine;
mod quadrature;

pub use criteria::{
    CandidateValue, Criterion, CriterionValues, Estimate, Lookahead, SnReference,
    DEFAULT_SN_GRID_CAP,
};
pub use engine::{
    pick_response, run_loop, score_candidates, select_next, CandidateSource,
    StopReason, SurConfig, SurOutcome, SurRecord, SurState,
};
pub use quadrature::GaussHermite;
