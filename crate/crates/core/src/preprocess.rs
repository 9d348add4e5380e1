//! Tokenization and root-word identification.
//!
//! Tokens are produced by splitting on whitespace and then on any character
//! of the configured punctuation set, lowercasing, and dropping stopwords.
//! Roots come from a short ordered list of English suffix rules applied to a
//! fixed point, with a per-corpus exception map consulted first.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::ingest::UnifiedDataset;
use crate::tsv;

/// Default stopword list, applied to normalized tokens.
pub const DEFAULT_STOPWORDS: [&str; 25] = [
    "a", "an", "the", "and", "or", "but", "of", "in", "on", "at", "to", "for", "with", "by", "from", "is", "are",
    "was", "were", "be", "it", "its", "this", "that", "s",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessConfig {
    pub punctuation: BTreeSet<char>,
    pub stopwords: BTreeSet<String>,
    pub stem_exceptions: BTreeMap<String, String>,
    /// Split field values into words. When false a whole field value becomes
    /// a single token.
    pub split_multiword: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            punctuation: ascii_punctuation(),
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            stem_exceptions: BTreeMap::new(),
            split_multiword: true,
        }
    }
}

impl PreprocessConfig {
    /// Default punctuation, no stopwords.
    pub fn without_stopwords() -> Self {
        PreprocessConfig {
            stopwords: BTreeSet::new(),
            ..PreprocessConfig::default()
        }
    }
}

pub fn ascii_punctuation() -> BTreeSet<char> {
    (0u8..=127).map(char::from).filter(char::is_ascii_punctuation).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub record_id: usize,
    pub field_name: String,
    /// 0-based index among the kept tokens of one field.
    pub position: usize,
    /// Byte range of `surface` inside the field value.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootWord {
    pub root: String,
    pub source: Token,
}

/// A token before it is attached to a record and field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub surface: String,
    pub normalized: String,
    pub position: usize,
    pub start: usize,
    pub end: usize,
}

pub fn tokenize(text: &str, config: &PreprocessConfig) -> Vec<Fragment> {
    if !config.split_multiword {
        return whole_value(text, config).into_iter().collect();
    }
    let mut fragments = Vec::new();
    for (start, end) in word_spans(text, config) {
        let surface = &text[start..end];
        let normalized = surface.to_lowercase();
        if config.stopwords.contains(&normalized) {
            continue;
        }
        fragments.push(Fragment {
            surface: surface.to_owned(),
            normalized,
            position: fragments.len(),
            start,
            end,
        });
    }
    fragments
}

// Maximal runs of characters that are neither whitespace nor punctuation.
fn word_spans(text: &str, config: &PreprocessConfig) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        let boundary = c.is_whitespace() || config.punctuation.contains(&c);
        match (boundary, start) {
            (true, Some(s)) => {
                spans.push((s, i));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

fn whole_value(text: &str, config: &PreprocessConfig) -> Option<Fragment> {
    let spans = word_spans(text, config);
    let words: Vec<String> = spans
        .iter()
        .map(|&(s, e)| text[s..e].to_lowercase())
        .filter(|w| !config.stopwords.contains(w))
        .collect();
    if words.is_empty() {
        return None;
    }
    let (start, end) = (spans[0].0, spans[spans.len() - 1].1);
    Some(Fragment {
        surface: text[start..end].to_owned(),
        normalized: words.join(" "),
        position: 0,
        start,
        end,
    })
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

// One suffix rule application, or None when no rule fires.
fn strip_suffix_once(word: &str) -> Option<String> {
    if let Some(stem) = word.strip_suffix("ies") {
        if !stem.is_empty() {
            return Some(format!("{stem}y"));
        }
    }
    if let Some(stem) = word.strip_suffix("es") {
        let sibilant = ["x", "z", "ch", "sh", "ss"].iter().any(|s| stem.ends_with(s));
        if sibilant && char_len(stem) >= 2 {
            return Some(stem.to_owned());
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        if !stem.ends_with('s') && char_len(stem) >= 3 {
            return Some(stem.to_owned());
        }
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if char_len(stem) >= 3 && has_vowel(stem) {
            return Some(stem.to_owned());
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if char_len(stem) >= 3 && has_vowel(stem) && !stem.ends_with('e') {
            return Some(stem.to_owned());
        }
    }
    None
}

/// Maps a normalized token to its lookup root.
///
/// The exception map wins outright and its targets are terminal; otherwise
/// suffix rules are applied until none fires. Both make the function
/// idempotent.
pub fn identify_root(normalized: &str, config: &PreprocessConfig) -> String {
    let mut word = normalized.to_lowercase();
    if config
        .stem_exceptions
        .values()
        .any(|target| target.to_lowercase() == word)
    {
        return word;
    }
    if let Some(root) = config.stem_exceptions.get(&word) {
        return root.to_lowercase();
    }
    while let Some(next) = strip_suffix_once(&word) {
        if let Some(root) = config.stem_exceptions.get(&next) {
            return root.to_lowercase();
        }
        word = next;
    }
    word
}

/// Tokenizes every field value of every record, in dataset order, pairing
/// each token with its root.
pub fn generate_tokens(dataset: &UnifiedDataset, config: &PreprocessConfig) -> Vec<RootWord> {
    let mut out = Vec::new();
    for record in &dataset.records {
        for (field_name, value) in &record.fields {
            out.extend(field_roots(record.record_id, field_name, value, config));
        }
    }
    out
}

/// Tokens and roots of a single field value.
pub fn field_roots(record_id: usize, field_name: &str, value: &str, config: &PreprocessConfig) -> Vec<RootWord> {
    tokenize(value, config)
        .into_iter()
        .map(|fragment| RootWord {
            root: identify_root(&fragment.normalized, config),
            source: Token {
                surface: fragment.surface,
                normalized: fragment.normalized,
                record_id,
                field_name: field_name.to_owned(),
                position: fragment.position,
                start: fragment.start,
                end: fragment.end,
            },
        })
        .collect()
}

/// Writes `record_id<TAB>field<TAB>position<TAB>surface<TAB>normalized<TAB>root`.
pub fn write_token_dump<W: Write>(roots: &[RootWord], out: &mut W) -> std::io::Result<()> {
    for rw in roots {
        let t = &rw.source;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            t.record_id,
            tsv::escape(&t.field_name),
            t.position,
            tsv::escape(&t.surface),
            tsv::escape(&t.normalized),
            tsv::escape(&rw.root)
        )?;
    }
    Ok(())
}
