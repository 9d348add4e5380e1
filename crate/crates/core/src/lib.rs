//! Multidimensional reference model for lexical matching.
//!
//! Heterogeneous inputs (CSV, JSON, plain text) are unified into records,
//! tokenized and stemmed, then matched against a score-indexed reference
//! model spanning six linguistic dimensions. A single-dimension baseline and
//! a batch evaluation harness sit alongside.

pub mod error;
pub mod eval;
pub mod harmonize;
pub mod ingest;
pub mod matcher;
pub mod preprocess;
pub mod refmodel;
pub mod tsv;

pub use error::{Error, Result};
pub use eval::{
    average_batches, batch_sizes, comparison_json, matched_percentage, partition_batches, run_experiment,
    write_comparison_tsv, Batch, BatchLabel, ComparisonRow, ExperimentConfig, Fixed2, Model, TermCounting,
};
pub use harmonize::{match_dataset, DatasetMatches, FieldMatches, HarmonizationReport};
pub use ingest::{ingest, IngestConfig, Origin, Record, Segmentation, SourceFormat, UnifiedDataset};
pub use matcher::{
    gather_candidates, mrm_match, select_candidate, srm_match, Candidate, MatchConfig, MatchResult, Rule, TokenMatch,
};
pub use preprocess::{generate_tokens, identify_root, tokenize, PreprocessConfig, RootWord, Token};
pub use refmodel::{
    build_index, load_model_dir, normalize_score, read_index, write_index, Dimension, DimensionGroup, IndexStats,
    ReferenceEntry, ReferenceIndex, ScoreScaleConfig,
};
