//! Learned substring transliteration.
//!
//! The crate learns a directional cost matrix over substring pairs from
//! noisy name-pair corpora by hard (Viterbi) EM over minimum-cost
//! segmentation matchings, generates k-best transliterations by exact
//! k-shortest-path search, matches words against large frequency lexicons,
//! and separates true from false cross-language friends with two semantic
//! tests (a bilingual dictionary and nearest-neighbour link counting in
//! monolingual embedding spaces).
//!
//! Module map:
//!
//! * [`ingest`]: text normalization, corpus cleaning and splitting, file loaders.
//! * [`model`]: the cost matrix, observation tables and the model file format.
//! * [`align`]: minimum-cost segmentation matching and bounded scoring.
//! * [`train`]: the iterative training loop and dirtiness.
//! * [`generate`]: k-best construction and pivoting through a third language.
//! * [`lexicon`]: detected-best search and gold ranks over a lexicon.
//! * [`eval`]: Top-k, Levenshtein-1, reports and heatmaps.
//! * [`semantics`]: embedding neighbours, friend scans and gold evaluation.
//! * [`synthetic`]: deterministic synthetic languages used by tests and demos.

pub mod align;
pub mod error;
pub mod eval;
pub mod generate;
pub mod ingest;
pub mod lexicon;
pub mod model;
pub mod semantics;
pub mod synthetic;
pub mod train;

mod util;

pub use align::{align, align_cost, is_flawed, Alignment, SourceAligner};
pub use error::{Error, Result};
pub use generate::{construct_topk, pivot_topk, Candidate, GenConfig, PivotCandidate};
pub use ingest::{normalize_text, NormConfig, PairCorpus, Split};
pub use model::{ObservationTable, PiecePair, TransliterationModel};
pub use train::{train, RoundStats, TrainConfig};
