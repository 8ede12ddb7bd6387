//! Min-K%++ pre-training data detection.
//!
//! Given per-token statistics from a language model (the log-probability of
//! the observed token plus the mean `mu` and standard deviation `sigma` of
//! log-probabilities under the model's next-token distribution), score each
//! sequence for how likely it is to have been seen in training:
//!
//! ```
//! use minkpp::{DetectorConfig, Label, PositionStats, SequenceRecord, Variant};
//!
//! let record = SequenceRecord::new(
//!     "doc",
//!     Label::Unknown,
//!     vec![
//!         PositionStats::new(-0.5, -1.0, 0.5),
//!         PositionStats::new(-3.0, -1.0, 0.5),
//!     ],
//! );
//! let config = DetectorConfig::minkpp(50.0, Variant::Full);
//! let scored = minkpp::detectors::score_record(&record, &config).unwrap();
//! assert_eq!(scored.score, -4.0);
//! ```
//!
//! Baselines (loss, zlib, reference model, lowercase, neighborhood, Min-K%)
//! live in [`detectors`], metrics in [`evaluation`], sliding-window detection
//! in [`online`], the JSON Lines format in [`ingestion`], and a small byte
//! n-gram model for offline experiments in [`toy_lm`].

pub mod aggregation;
pub mod cli;
pub mod corpus;
pub mod detectors;
pub mod error;
pub mod evaluation;
pub mod ingestion;
pub mod moments;
pub mod online;
pub mod sweep;
pub mod token_scores;
pub mod toy_lm;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    validate_record, DecisionRule, DetectorConfig, Label, Method, Mode, PositionStats, RefCombine,
    ReferenceStats, ScoredExample, SequenceRecord, Variant, Violation,
};
