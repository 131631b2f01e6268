//! Profiling of electric vehicles from the current and pilot time series
//! recorded during their charging sessions.
//!
//! The pipeline runs in stages:
//!
//! 1. [`data_model`]: canonical sessions, ingestion (canonical files and ACN
//!    session documents), eligibility filtering and artifact persistence.
//! 2. [`extraction`]: moving-average conditioning, backward tail walk and the
//!    moving-median Delta series over the constant-current phase.
//! 3. [`features`]: a fixed 128-entry catalog over (tail, delta), the 18-entry
//!    legacy set, min-max scaling and chi-squared top-k selection.
//! 4. [`classifiers`]: six binary classifiers with stratified grid-search CV.
//! 5. [`evaluation`]: Q-unbalanced assembly, repeated splits, metrics and the
//!    experiment sweeps.
//!
//! [`synth`] generates CC/CV charging sessions with known ground truth.

pub mod classifiers;
pub mod data_model;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod features;
pub mod seed;
pub mod synth;

mod par;

pub use error::{Error, Result};
