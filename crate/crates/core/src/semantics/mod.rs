//! Semantic tests over cross-language word pairs.
//!
//! A pair passes the translation test when a bilingual dictionary lists it,
//! and the embedding test when enough dictionary pairs link the two words'
//! nearest-neighbour sets, each computed inside its own monolingual space.
//! Vectors from different languages are never compared with each other.

mod embed;
mod friends;

pub use embed::{
    embedding_test, load_dictionary, load_embeddings, nearest_neighbors, EmbeddingTable,
    LinkOutcome, TranslationDict,
};
pub use friends::{
    classify_counts, eval_gold, records_tsv, scan_friends, summary_csv, ClassCounts, Cohort,
    CohortSummary, FriendClass, FriendConfig, FriendPolicy, FriendRecord, FriendScan, GoldScore,
};
