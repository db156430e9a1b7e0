//! Corpus-expansion toolkit for Nüshu–Chinese parallel text.
//!
//! The crate covers the full loop for growing a parallel corpus of an
//! extremely low-resource script pair:
//!
//! - [`dictionary`]: the bidirectional multi-mapping character dictionary
//!   (one Chinese character ↔ many Nüshu characters and vice versa) plus
//!   coverage queries used to filter candidate sentences.
//! - [`corpus`]: the parallel-corpus data model, normalization, splits,
//!   length binning, and synthetic fixture generation.
//! - [`provider`]: the translation-provider boundary — few-shot prompt
//!   assembly, an HTTP chat adapter, and a deterministic mock oracle.
//! - [`pipeline`]: the round engine — length validation, retries, seed-pool
//!   rotation, checkpointing, and round reports.
//! - [`eval`]: character-level BLEU / METEOR / ROUGE and accuracy metrics.
//! - [`embeddings`]: bilingual skip-gram with negative sampling.
//! - [`seq2seq`]: a character-level encoder-decoder trainer with manual
//!   backpropagation and the incremental-dataset experiment runner.
//!
//! Everything that consumes randomness takes an explicit seed; reruns with
//! the same seeds are bit-identical.

pub mod corpus;
pub mod dictionary;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod provider;
pub mod seq2seq;
pub mod util;

pub use error::{Error, Result};
