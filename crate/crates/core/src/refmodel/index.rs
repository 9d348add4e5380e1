use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::{normalize_score, Dimension, ReferenceEntry, ScoreScaleConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedTerm {
    pub term: String,
    pub norm_score: f64,
    pub raw_score: f64,
    pub tag: Option<String>,
    pub example: Option<String>,
}

/// Candidate lists of one root, keyed by dimension. Each list is sorted by
/// `norm_score` descending, then term ascending.
pub type DimensionMap = BTreeMap<Dimension, Vec<IndexedTerm>>;

static EMPTY: DimensionMap = BTreeMap::new();

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexStats {
    pub total_entries: usize,
    pub distinct_roots: usize,
    pub entries_per_dimension: BTreeMap<Dimension, usize>,
    /// Distinct whitespace-separated words over all roots and terms.
    pub distinct_words: usize,
    /// Whitespace-separated words over all roots and terms, with repeats.
    pub word_tokens: usize,
}

/// Immutable root → dimension → terms index.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceIndex {
    roots: BTreeMap<String, DimensionMap>,
    scales: ScoreScaleConfig,
    stats: IndexStats,
    lexical_roots: Vec<String>,
}

/// A borrowed view of one stored entry.
#[derive(Debug, Clone, Copy)]
pub struct EntryRef<'a> {
    pub root: &'a str,
    pub dimension: Dimension,
    pub term: &'a IndexedTerm,
}

fn by_score_then_term(a: &IndexedTerm, b: &IndexedTerm) -> Ordering {
    b.norm_score.total_cmp(&a.norm_score).then_with(|| a.term.cmp(&b.term))
}

// Duplicate resolution: higher raw score wins; equal scores fall back to the
// smaller (tag, example) so the outcome does not depend on input order.
fn replaces(new: &ReferenceEntry, old: &ReferenceEntry) -> bool {
    match new.raw_score.total_cmp(&old.raw_score) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (&new.tag, &new.example) < (&old.tag, &old.example),
    }
}

/// Groups entries by root and dimension.
///
/// Duplicate `(root, term, dimension)` triples keep the maximum raw score.
/// Frequency references in `scales` are replaced by the largest raw score
/// observed in their dimension before anything is normalized.
pub fn build_index<I>(entries: I, scales: &ScoreScaleConfig) -> Result<ReferenceIndex>
where
    I: IntoIterator<Item = ReferenceEntry>,
{
    let mut unique: BTreeMap<(String, Dimension, String), ReferenceEntry> = BTreeMap::new();
    for entry in entries {
        if entry.root.is_empty() || entry.term.is_empty() {
            return Err(Error::Domain(format!(
                "reference entries need a root and a term, got ({:?}, {:?})",
                entry.root, entry.term
            )));
        }
        if !entry.raw_score.is_finite() || entry.raw_score < 0.0 {
            return Err(Error::Domain(format!(
                "raw score of ({}, {}) must be finite and non-negative",
                entry.root, entry.term
            )));
        }
        let key = (entry.root.clone(), entry.dimension, entry.term.clone());
        match unique.get(&key) {
            Some(existing) if !replaces(&entry, existing) => {}
            _ => {
                unique.insert(key, entry);
            }
        }
    }

    let mut scales = scales.clone();
    for dimension in [Dimension::WordOrder, Dimension::CoOccurrence] {
        let max = unique
            .values()
            .filter(|e| e.dimension == dimension)
            .map(|e| e.raw_score)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
        if let Some(max) = max {
            // A dimension whose frequencies are all zero keeps a unit reference.
            scales.set_frequency_reference(dimension, if max > 0.0 { max } else { 1.0 });
        }
    }

    ReferenceIndex::assemble(unique.into_values(), scales)
}

impl ReferenceIndex {
    /// Normalizes and sorts already de-duplicated entries under fixed scales.
    pub(crate) fn assemble<I>(entries: I, scales: ScoreScaleConfig) -> Result<ReferenceIndex>
    where
        I: IntoIterator<Item = ReferenceEntry>,
    {
        scales.validate()?;
        let mut roots: BTreeMap<String, DimensionMap> = BTreeMap::new();
        for entry in entries {
            let norm_score = normalize_score(entry.raw_score, entry.dimension, &scales)?;
            roots
                .entry(entry.root)
                .or_default()
                .entry(entry.dimension)
                .or_default()
                .push(IndexedTerm {
                    term: entry.term,
                    norm_score,
                    raw_score: entry.raw_score,
                    tag: entry.tag,
                    example: entry.example,
                });
        }

        let mut stats = IndexStats {
            entries_per_dimension: Dimension::ALL.iter().map(|d| (*d, 0)).collect(),
            ..IndexStats::default()
        };
        let mut words = BTreeSet::new();
        for (root, dims) in &mut roots {
            for (dimension, terms) in dims.iter_mut() {
                terms.sort_by(by_score_then_term);
                *stats.entries_per_dimension.get_mut(dimension).unwrap() += terms.len();
                for t in terms.iter() {
                    for w in root.split_whitespace().chain(t.term.split_whitespace()) {
                        stats.word_tokens += 1;
                        if !words.contains(w) {
                            words.insert(w.to_owned());
                        }
                    }
                }
            }
        }
        stats.total_entries = stats.entries_per_dimension.values().sum();
        stats.distinct_roots = roots.len();
        stats.distinct_words = words.len();

        let lexical_roots = roots
            .iter()
            .filter(|(_, dims)| dims.contains_key(&Dimension::LexicalSemantic))
            .map(|(root, _)| root.clone())
            .collect();

        Ok(ReferenceIndex {
            roots,
            scales,
            stats,
            lexical_roots,
        })
    }

    /// Per-dimension candidate lists for `root`; empty when the root is absent.
    pub fn lookup(&self, root: &str) -> &DimensionMap {
        self.roots.get(root).unwrap_or(&EMPTY)
    }

    pub fn contains_root(&self, root: &str) -> bool {
        self.roots.contains_key(root)
    }

    pub fn stats(&self) -> &IndexStats {
        &self.stats
    }

    /// Scales in effect, including the frequency references chosen at build.
    pub fn scales(&self) -> &ScoreScaleConfig {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.stats.total_entries
    }

    pub fn is_empty(&self) -> bool {
        self.stats.total_entries == 0
    }

    pub fn roots(&self) -> impl Iterator<Item = &str> {
        self.roots.keys().map(String::as_str)
    }

    /// Roots that carry at least one lexical-semantic entry, ascending.
    pub fn lexical_roots(&self) -> &[String] {
        &self.lexical_roots
    }

    /// Every stored entry in storage order: root ascending, then dimension,
    /// then the per-list sort order.
    pub fn entries(&self) -> impl Iterator<Item = EntryRef<'_>> {
        self.roots.iter().flat_map(|(root, dims)| {
            dims.iter().flat_map(move |(dimension, terms)| {
                terms.iter().map(move |term| EntryRef {
                    root,
                    dimension: *dimension,
                    term,
                })
            })
        })
    }
}

pub fn index_stats(index: &ReferenceIndex) -> &IndexStats {
    index.stats()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn syn(root: &str, term: &str, raw: f64) -> ReferenceEntry {
        ReferenceEntry::new(root, term, Dimension::Synonym, raw)
    }

    #[test]
    fn aggregates_by_root_and_sorts() {
        let index = build_index(
            vec![syn("happy", "glad", 9.17), syn("happy", "cheerful", 9.55)],
            &ScoreScaleConfig::default(),
        )
        .unwrap();
        let list = &index.lookup("happy")[&Dimension::Synonym];
        let got: Vec<(&str, f64)> = list.iter().map(|t| (t.term.as_str(), t.norm_score)).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, "cheerful");
        assert!((got[0].1 - 0.955).abs() < 1e-12);
        assert_eq!(got[1].0, "glad");
        assert!((got[1].1 - 0.917).abs() < 1e-12);
    }

    #[test]
    fn duplicates_keep_max() {
        let index = build_index(
            vec![syn("large", "big", 9.0), syn("large", "big", 9.55)],
            &ScoreScaleConfig::default(),
        )
        .unwrap();
        let list = &index.lookup("large")[&Dimension::Synonym];
        assert_eq!(list.len(), 1);
        assert_eq!(list[0].raw_score, 9.55);
        assert_eq!(index.stats().total_entries, 1);
    }

    #[test]
    fn empty_index() {
        let index = build_index(Vec::new(), &ScoreScaleConfig::default()).unwrap();
        assert_eq!(index.stats().total_entries, 0);
        assert_eq!(index.stats().distinct_roots, 0);
        assert!(index.lookup("zzzz").is_empty());
    }

    #[test]
    fn stats_count_entries_and_roots() {
        let index = build_index(
            vec![
                syn("happy", "glad", 9.17),
                syn("happy", "cheerful", 9.55),
                ReferenceEntry::new("happy", "mad", Dimension::Antonym, 0.95),
                syn("smart", "intelligent", 9.2),
            ],
            &ScoreScaleConfig::default(),
        )
        .unwrap();
        let stats = index.stats();
        assert_eq!(stats.total_entries, 4);
        assert_eq!(stats.distinct_roots, 2);
        assert_eq!(stats.entries_per_dimension[&Dimension::Synonym], 3);
        assert_eq!(stats.entries_per_dimension[&Dimension::Antonym], 1);
        assert_eq!(stats.entries_per_dimension[&Dimension::WordOrder], 0);
        // happy, glad, cheerful, mad, smart, intelligent
        assert_eq!(stats.distinct_words, 6);
        assert_eq!(stats.word_tokens, 8);
    }

    #[test]
    fn frequency_reference_is_observed_max() {
        let index = build_index(
            vec![
                ReferenceEntry::new("you know", "you know", Dimension::WordOrder, 27648.0),
                ReferenceEntry::new("as well", "as well", Dimension::WordOrder, 5754.0),
            ],
            &ScoreScaleConfig::default(),
        )
        .unwrap();
        assert_eq!(index.scales().word_order_reference, 27648.0);
        assert_eq!(index.scales().co_occurrence_reference, 1.0);
        assert_eq!(index.lookup("you know")[&Dimension::WordOrder][0].norm_score, 1.0);
    }

    #[test]
    fn rejects_empty_root() {
        assert!(build_index(vec![syn("", "x", 1.0)], &ScoreScaleConfig::default()).is_err());
    }

    fn arb_entries() -> impl Strategy<Value = Vec<ReferenceEntry>> {
        let entry = (0usize..5, 0usize..5, 0usize..6, 0.0f64..40_000.0)
            .prop_map(|(r, t, d, raw)| ReferenceEntry::new(format!("r{r}"), format!("t{t}"), Dimension::ALL[d], raw));
        proptest::collection::vec(entry, 0..40)
    }

    proptest! {
        #[test]
        fn lists_are_sorted_and_in_range(entries in arb_entries()) {
            let index = build_index(entries, &ScoreScaleConfig::default()).unwrap();
            for root in index.roots() {
                for terms in index.lookup(root).values() {
                    for pair in terms.windows(2) {
                        prop_assert_ne!(by_score_then_term(&pair[0], &pair[1]), Ordering::Greater);
                    }
                    for t in terms {
                        prop_assert!((0.0..=1.0).contains(&t.norm_score));
                    }
                }
            }
            let stats = index.stats();
            prop_assert_eq!(stats.total_entries, stats.entries_per_dimension.values().sum::<usize>());
        }

        #[test]
        fn build_ignores_input_order(entries in arb_entries(), seed in any::<u64>()) {
            let mut shuffled = entries.clone();
            // Deterministic Fisher-Yates driven by a tiny LCG.
            let mut state = seed | 1;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state >> 33) as usize % (i + 1));
            }
            let a = build_index(entries, &ScoreScaleConfig::default()).unwrap();
            let b = build_index(shuffled, &ScoreScaleConfig::default()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn duplicates_store_the_maximum(raws in proptest::collection::vec(0.0f64..10.0, 1..10)) {
            let entries: Vec<_> = raws.iter().map(|r| syn("large", "big", *r)).collect();
            let index = build_index(entries, &ScoreScaleConfig::default()).unwrap();
            let stored = index.lookup("large")[&Dimension::Synonym][0].raw_score;
            prop_assert_eq!(stored, raws.iter().cloned().fold(f64::MIN, f64::max));
        }
    }
}
