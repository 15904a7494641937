//! Semantic similarity between sets of ontology triples.
//!
//! Items and user profiles are described as `<subject,predicate,object>`
//! triples. Textual components are compared through word vectors (a
//! pre-trained embedding or corpus TF-IDF), numeric objects by distance,
//! and whole sets by aggregating predicate-aligned triple pairs. The
//! [`recommender`] module ranks catalog items against a profile.

pub mod error;
pub mod recommender;
pub mod similarity;
pub mod triple_model;
pub mod vector_space;

pub use error::{Error, Result};
pub use recommender::{
    load_catalog, rank_items, read_log, record_interaction, InteractionEvent, InteractionKind,
    ItemCatalog, RankedItem, RankedList, UserProfile,
};
pub use similarity::{
    align_triples, batet_similarity, AlignedPairs, Alignment, NumericMode, NumericRanges, SetMode,
    SimilarityConfig, SimilarityEngine, SimilarityMatrix, Taxonomy, Weights,
};
pub use triple_model::{
    classify_object, parse_listing, parse_listing_file, tokenize_term, ObjectKind, ObjectValue,
    Term, Triple, TripleSet,
};
pub use vector_space::{
    cosine, word_similarity, Backend, EmbeddingStore, TfIdfModel, VectorModel, WordSimPolicy,
};
