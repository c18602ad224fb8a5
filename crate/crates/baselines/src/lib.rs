//! Placement baselines that do not summarize: nearest neighbor over a
//! lexical taxonomy or over precomputed name embeddings, and two direct
//! prompting variants (seen examples only, or no preferences at all).
//!
//! Every nearest-neighbor rule breaks ties by seen-list order.

mod embedding;
mod prompting;
mod taxonomy;

use std::path::Path;

pub use embedding::{cosine_similarity, embedding_predict, EmbeddingError, EmbeddingTable};
pub use prompting::{commonsense_predict, examples_only_predict, LlmBaselineError};
pub use taxonomy::{
    taxonomy_distance, taxonomy_predict, NameMapping, TaxonomyError, TaxonomyGraph,
};

/// Non-comment, non-blank lines of a tab-separated resource file, with
/// 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

pub(crate) fn read_file(path: &Path) -> Result<String, std::io::Error> {
    std::fs::read_to_string(path)
}
