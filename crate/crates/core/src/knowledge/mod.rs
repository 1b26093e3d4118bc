//! Knowledge store: typed graph of application types, domains, software
//! stacks, UI-element mappings, best practices and code samples, with
//! deterministic embeddings for vector retrieval.

mod embed;
mod graph;
mod retrieve;
mod seed;
mod version;

use thiserror::Error;

pub use embed::{cosine, embed, tokens, Embedder, HashedBagOfWords, EMBEDDING_DIM};
pub use graph::{
    parse_libraries, CodeSample, KnowledgeEdge, KnowledgeGraph, KnowledgeNode, NodeKind, Relation, RequiredLibrary,
    UIElementMapping,
};
pub(crate) use retrieve::merge_constraints;
pub use retrieve::{
    retrieve_for_trees, retrieve_mappings, retrieve_mappings_with, retrieve_samples, select_libraries, LibraryEntry,
    LibrarySelection, NodeRetrieval, Query, ScoredMapping, EXACT_KIND_BONUS,
};
pub use seed::{seed_graph, SEED_KB_JSON};
pub use version::{ConstraintParseError, VersionConstraint};

#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("knowledge base is not valid JSON: {0}")]
    Json(#[source] serde_json::Error),
    #[error("knowledge base integrity check failed:\n  {}", .0.join("\n  "))]
    Integrity(Vec<String>),
    #[error("version conflict for `{library}`: `{first}` and `{second}` cannot both hold")]
    Conflict { library: String, first: String, second: String },
    #[error("{0}")]
    InvalidArgument(String),
}

/// Loads a knowledge-base document from disk.
pub fn load_knowledge(path: &std::path::Path) -> Result<KnowledgeGraph, KnowledgeError> {
    KnowledgeGraph::load(path)
}
