//! Measuring how concentrated the coverage of people is across news outlets.
//!
//! The pipeline loads a JSON-Lines corpus of articles with per-person mention
//! counts, cleans and filters names, replaces byline authors with stable
//! aliases, and reports mention inequality (Gini, skewness, Zipf slope),
//! author-level repetition, title terms and title sentiment per outlet.

pub mod anonymize;
pub mod bias;
pub mod corpus;
pub mod fixture;
pub mod names;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod text;

pub use pipeline::{run_audit, AuditError, RunConfig, RunOutcome};
