//! Fairness robustness of Bayesian-network classifiers.
//!
//! Discrete factor algebra, exact inference, structure learning from
//! discretised tabular data, and the per-instance fairness robustness level
//! (the largest shift of the target posterior reachable by re-assigning the
//! private features) computed through an auxiliary likelihood-ratio field.

pub mod error;
pub mod evaluation;
pub mod fairness;
pub mod inference;
pub mod ingest;
pub mod learning;
pub mod model;
pub mod par;
pub mod synth;

pub use error::{Error, Result};
