//! Allocation-only core for synthesizing follow-up question ranking data and
//! scoring candidate follow-ups.
//!
//! The crate is `no_std` and needs only `alloc`. Everything that touches the
//! filesystem, the network or a thread pool lives in the `followup` crate;
//! here are the pure pieces:
//!
//! - [`text`]: the one tokenizer shared by entity matching, the index and the
//!   embeddings.
//! - [`corpus`]: conversations, dialog contexts, candidates and samples.
//! - [`entity`]: gazetteer catalog, longest-match mention detection, name lexicon.
//! - [`phonetics`]: phonetic keys and similar-sounding token lookup.
//! - [`confounders`]: the typed negative generators and sample assembly.
//! - [`index`]: inverted index with BM25 scoring.
//! - [`embeddings`]: mean-pooled word vectors and cosine similarity.
//! - [`ranking`]: pluggable scorers and deterministic candidate ordering.
//! - [`eval`]: MRR, hit ratio and per-label score distributions.
#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod confounders;
pub mod corpus;
pub mod embeddings;
pub mod entity;
pub mod eval;
pub mod index;
pub mod phonetics;
pub mod ranking;
pub mod seed;
pub mod text;

pub use corpus::{Candidate, Conversation, DialogContext, Label, QaPair, Sample, SampleSkeleton, Turn};
pub use entity::{EntityCatalog, EntityEntry, EntityMention, EntityType, NameLexicon};
pub use eval::EvalReport;
pub use index::{Bm25Params, InvertedIndex, QuestionBank};
pub use ranking::{RankedList, Scorer};
