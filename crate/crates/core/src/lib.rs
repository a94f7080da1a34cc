//! Per-attack-category classifier selection for network intrusion detection.
//!
//! The crate covers the whole pipeline over KDD99-format connection records:
//! parsing and stratified sampling ([`kdd`]), ten classic learners behind one
//! train/predict contract ([`classifiers`]), per-category TP/FP evaluation
//! ([`metrics`]), choosing one learner per attack category under an accuracy
//! or latency policy ([`selection`]) and running the chosen learners side by
//! side as a detector ([`ensemble`]).

pub mod error;
pub mod kdd;
pub mod classifiers;
pub mod metrics;
pub mod selection;
pub mod ensemble;
pub mod synth;

pub use error::{Error, Result};
