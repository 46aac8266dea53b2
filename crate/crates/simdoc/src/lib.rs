//! SimDoc: documents as sentence-segmented topic sequences, compared
//! with a two-level adapted Smith-Waterman alignment whose mismatch
//! penalties are softened by embedding-based topic similarity. Includes
//! bag-of-words baselines, triplet and clustering evaluation harnesses,
//! a synthetic planted-triplet generator, and a parameter tuner.

pub mod alignment;
pub mod baselines;
pub mod document_scorer;
pub mod error;
pub mod evaluation;
pub mod manifest;
pub mod pipeline;
pub mod synth;
pub mod text_pipeline;
pub mod topic_embedding;
pub mod topic_model;
pub mod tuner;

pub use error::{Result, SimDocError};
