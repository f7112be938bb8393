//! Detection of mathematical content reuse in STEM documents.
//!
//! Documents are reduced to three feature channels (identifier sequences,
//! citation sequences and text fingerprints), candidates are retrieved per
//! channel from an inverted index, and each candidate pair is scored by
//! seven similarity measures.

pub mod calibration;
pub mod config;
pub mod corpus;
pub mod doc_model;
pub mod error;
pub mod features;
pub mod index;
pub mod measures;
pub mod pipeline;
pub mod retrieval;
pub mod synth;

pub use calibration::{default_thresholds, ThresholdConfig};
pub use config::RunConfig;
pub use corpus::{Corpus, DocFeatures};
pub use doc_model::Document;
pub use error::{Error, Result};
pub use index::CorpusIndex;
pub use measures::{compare_pair, Channel, GateConfig, Measure, Score, SimilarityReport};
pub use pipeline::{Analysis, Engine, EvaluationResult, TestCase};
