//! Distributive fairness metrics, cross-group pair selection, the
//! explanation-based procedural fairness score, and the combined audit.

mod audit;
mod metrics;
mod pairs;

pub use audit::{
    audit, audit_with_details, gpf_fae, gpf_from_pairs, AuditConfig, AuditReport, GpfResult, PoolChoice, Verdict,
    Verdicts,
};
pub use metrics::{accuracy, dp, eo, eod, individual_fairness, IndividualFairness};
pub use pairs::{match_anchors, sample_anchors, select_pairs, PairSelection};
