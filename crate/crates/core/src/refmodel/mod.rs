//! The multidimensional reference model.
//!
//! Scored `(root, term)` pairs are read from six dimension files, their raw
//! scores are mapped onto `[0, 1]`, and the result is aggregated per root into
//! an immutable [`ReferenceIndex`] where one root may point at many terms in
//! many dimensions.

mod index;
mod parse;
mod store;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use index::{build_index, index_stats, DimensionMap, EntryRef, IndexStats, IndexedTerm, ReferenceIndex};
pub use parse::{normalize_phrase, parse_dimension_file, parse_dimension_str, ParseOptions};
pub use store::{read_index, read_index_from, write_index, write_index_to, INDEX_MAGIC};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dimension {
    Synonym,
    Antonym,
    FormalSemantic,
    LexicalSemantic,
    WordOrder,
    CoOccurrence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DimensionGroup {
    Context,
    Semantic,
    Syntactic,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Synonym,
        Dimension::Antonym,
        Dimension::FormalSemantic,
        Dimension::LexicalSemantic,
        Dimension::WordOrder,
        Dimension::CoOccurrence,
    ];

    pub fn group(self) -> DimensionGroup {
        match self {
            Dimension::Synonym | Dimension::Antonym => DimensionGroup::Context,
            Dimension::FormalSemantic | Dimension::LexicalSemantic => DimensionGroup::Semantic,
            Dimension::WordOrder | Dimension::CoOccurrence => DimensionGroup::Syntactic,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Synonym => "synonym",
            Dimension::Antonym => "antonym",
            Dimension::FormalSemantic => "formal_semantic",
            Dimension::LexicalSemantic => "lexical_semantic",
            Dimension::WordOrder => "word_order",
            Dimension::CoOccurrence => "co_occurrence",
        }
    }

    /// File name of this dimension inside a model directory.
    pub fn file_name(self) -> &'static str {
        match self {
            Dimension::Synonym => "synonym.tsv",
            Dimension::Antonym => "antonym.tsv",
            Dimension::FormalSemantic => "formal.tsv",
            Dimension::LexicalSemantic => "lexical.tsv",
            Dimension::WordOrder => "wordorder.tsv",
            Dimension::CoOccurrence => "cooccurrence.tsv",
        }
    }

    /// Word-order and co-occurrence scores are corpus frequencies.
    pub fn is_frequency(self) -> bool {
        self.group() == DimensionGroup::Syntactic
    }

    pub(crate) fn code(self) -> u8 {
        Dimension::ALL.iter().position(|d| *d == self).unwrap() as u8
    }

    pub(crate) fn from_code(code: u8) -> Option<Dimension> {
        Dimension::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', ' '], "_");
        Dimension::ALL
            .into_iter()
            .find(|d| {
                d.name() == key
                    || d.name().replace('_', "") == key.replace('_', "")
                    || d.file_name().trim_end_matches(".tsv") == key
            })
            .ok_or_else(|| Error::Config(format!("unknown dimension `{s}`")))
    }
}

/// One scored `(root, term)` pair in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub root: String,
    pub term: String,
    pub dimension: Dimension,
    pub raw_score: f64,
    pub norm_score: f64,
    /// Phrase or part-of-speech tag (word order, co-occurrence).
    pub tag: Option<String>,
    pub example: Option<String>,
}

impl ReferenceEntry {
    /// An entry whose `norm_score` is filled in later by [`build_index`].
    pub fn new(root: impl Into<String>, term: impl Into<String>, dimension: Dimension, raw_score: f64) -> Self {
        ReferenceEntry {
            root: root.into(),
            term: term.into(),
            dimension,
            raw_score,
            norm_score: 0.0,
            tag: None,
            example: None,
        }
    }
}

/// Scale maxima used to bring raw scores onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreScaleConfig {
    pub synonym_max: f64,
    pub antonym_max: f64,
    pub semantic_max: f64,
    /// Largest word-order frequency; replaced by the observed maximum at build.
    pub word_order_reference: f64,
    /// Largest co-occurrence frequency; replaced by the observed maximum at build.
    pub co_occurrence_reference: f64,
}

impl Default for ScoreScaleConfig {
    fn default() -> Self {
        ScoreScaleConfig {
            synonym_max: 10.0,
            antonym_max: 10.0,
            semantic_max: 5.0,
            word_order_reference: 1.0,
            co_occurrence_reference: 1.0,
        }
    }
}

impl ScoreScaleConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("synonym_max", self.synonym_max),
            ("antonym_max", self.antonym_max),
            ("semantic_max", self.semantic_max),
            ("word_order_reference", self.word_order_reference),
            ("co_occurrence_reference", self.co_occurrence_reference),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!("{name} must be a positive number, got {value}")));
            }
        }
        Ok(())
    }

    /// The scale maximum (or frequency reference) for one dimension.
    pub fn scale_for(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Synonym => self.synonym_max,
            Dimension::Antonym => self.antonym_max,
            Dimension::FormalSemantic | Dimension::LexicalSemantic => self.semantic_max,
            Dimension::WordOrder => self.word_order_reference,
            Dimension::CoOccurrence => self.co_occurrence_reference,
        }
    }

    pub(crate) fn set_frequency_reference(&mut self, dimension: Dimension, value: f64) {
        match dimension {
            Dimension::WordOrder => self.word_order_reference = value,
            Dimension::CoOccurrence => self.co_occurrence_reference = value,
            _ => {}
        }
    }
}

/// Parses every dimension file present in `dir` and builds the index.
/// Absent files are skipped; a directory with none of them is an error.
pub fn load_model_dir(dir: &Path, options: &ParseOptions, scales: &ScoreScaleConfig) -> Result<ReferenceIndex> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "model directory not found"),
        ));
    }
    let mut entries = Vec::new();
    let mut found = false;
    for dimension in Dimension::ALL {
        let path = dir.join(dimension.file_name());
        if path.is_file() {
            found = true;
            entries.extend(parse_dimension_file(&path, dimension, options)?);
        }
    }
    if !found {
        return Err(Error::NoModel(dir.to_owned()));
    }
    build_index(entries, scales)
}

/// Maps a raw score onto `[0, 1]`.
///
/// Similarity dimensions divide by their scale maximum; frequency dimensions
/// use `log10(1 + raw) / log10(1 + reference)`. Both are clamped to 1.
pub fn normalize_score(raw: f64, dimension: Dimension, scales: &ScoreScaleConfig) -> Result<f64> {
    if !raw.is_finite() || raw < 0.0 {
        return Err(Error::Domain(format!(
            "raw score must be a finite non-negative number, got {raw}"
        )));
    }
    let scale = scales.scale_for(dimension);
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::Domain(format!(
            "scale for {dimension} must be positive, got {scale}"
        )));
    }
    let norm = if dimension.is_frequency() {
        // ln_1p ratio equals the log10 ratio and is exact near zero.
        raw.ln_1p() / scale.ln_1p()
    } else {
        raw / scale
    };
    Ok(norm.min(1.0))
}
