//! Corpus preparation: cleaning and filtering sentence pairs, building
//! document-level training samples joined with a separator tag, and mapping
//! document-level output back to sentences.

mod docs;
mod filter;
mod normalize;

pub use docs::{
    build_doc_dataset, build_merged_dataset, join_sentences, map_doc_nbest, split_doc_hypothesis, synthetic_shuffle,
    write_doc_samples, DocMapReport, DocMode, DocSample, SEP_JOIN, SEP_TAG,
};
pub use filter::{filter_corpus, FilterConfig, FilterReport};
pub use normalize::{normalize_punct, strip_nonprinting};

/// Whitespace token count, the default length measure.
pub fn whitespace_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}
