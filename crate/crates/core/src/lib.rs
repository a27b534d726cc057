//! Sentence-level persuasion classification and ad-library analytics.
//!
//! The crate covers corpus loading and stratified splitting, text
//! preprocessing and tf-idf features, a linear sigmoid classifier trained with
//! an asymmetric weighted cross-entropy, threshold calibration, evaluation
//! metrics, and bucket/trend analytics over scored ads.

pub mod analytics;
pub mod corpus;
pub mod error;
pub mod features;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};
