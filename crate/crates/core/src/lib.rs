//! Non-neural machinery for an n-best based machine translation system.
//!
//! The crate covers the pieces that sit around the decoder:
//!
//! * [`nbest`]: the `|||` n-best wire format, weight vectors and list merging.
//! * [`metrics`]: sacreBLEU-compatible BLEU and chrF, plus paired bootstrap resampling.
//! * [`reranker`]: linear rescoring, top-k pruning, MERT and ensemble weight grid search.
//! * [`mbr`]: minimum Bayes risk decoding and the prune-then-MBR pipeline.
//! * [`factors`]: named-entity source factors and their propagation to subwords.
//! * [`datapipe`]: corpus filtering, punctuation normalization and document-level datasets.
//! * [`postprocess`]: rule-based post-editing of final translations.
//! * [`tm`]: translation-memory indexing and fuzzy retrieval.

pub mod corpus;
pub mod datapipe;
pub mod error;
pub mod factors;
pub mod mbr;
pub mod metrics;
pub mod nbest;
pub mod postprocess;
pub mod reranker;
pub mod tm;

pub use error::{Error, Result};
