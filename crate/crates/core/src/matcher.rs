//! Token-to-term matching.
//!
//! Two matchers live here. The single-dimension baseline compares a root
//! against a flat term list by normalized edit-distance similarity and keeps
//! the best term above a threshold. The multidimensional matcher looks a root
//! (and the n-grams starting at it) up in a [`ReferenceIndex`], gathers
//! candidates from all six dimensions, and picks one per position with the
//! context-precedence rule.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::preprocess::RootWord;
use crate::refmodel::{Dimension, DimensionGroup, ReferenceIndex};
use crate::tsv;

// Slack for length-based pruning so it never drops a candidate that the
// exact similarity would have admitted.
const PRUNE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub srm_threshold: f64,
    pub mrm_threshold: f64,
    pub context_precedence: bool,
    /// Let antonyms take part in context precedence.
    pub antonym_context: bool,
    /// Also match lexical-semantic roots approximately, scoring them as
    /// entry score times string similarity.
    pub fuzzy_lexical: bool,
    /// Tie-break order between dimensions, most preferred first.
    pub dimension_priority: Vec<Dimension>,
    /// Longest n-gram looked up for multiword terms.
    pub ngram_max: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            srm_threshold: 0.75,
            mrm_threshold: 0.5,
            context_precedence: true,
            antonym_context: false,
            fuzzy_lexical: true,
            dimension_priority: vec![
                Dimension::Synonym,
                Dimension::LexicalSemantic,
                Dimension::FormalSemantic,
                Dimension::WordOrder,
                Dimension::CoOccurrence,
                Dimension::Antonym,
            ],
            ngram_max: 3,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("srm_threshold", self.srm_threshold),
            ("mrm_threshold", self.mrm_threshold),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {value}")));
            }
        }
        let mut seen = self.dimension_priority.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != Dimension::ALL.len() || self.dimension_priority.len() != Dimension::ALL.len() {
            return Err(Error::Config(
                "dimension_priority must list each of the six dimensions exactly once".into(),
            ));
        }
        if self.ngram_max == 0 {
            return Err(Error::Config("ngram_max must be at least 1".into()));
        }
        Ok(())
    }

    fn priority(&self, dimension: Dimension) -> usize {
        self.dimension_priority
            .iter()
            .position(|d| *d == dimension)
            .unwrap_or(usize::MAX)
    }

    fn is_context(&self, dimension: Dimension) -> bool {
        dimension.group() == DimensionGroup::Context && (dimension != Dimension::Antonym || self.antonym_context)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub term: String,
    pub dimension: Dimension,
    pub norm_score: f64,
    /// Number of tokens the candidate's key covers, starting at its position.
    pub span: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    ContextPrecedence,
    HighestScore,
    LexicalOnly,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::ContextPrecedence => "context_precedence",
            Rule::HighestScore => "highest_score",
            Rule::LexicalOnly => "lexical_only",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub root: String,
    pub term: String,
    /// Baseline matches report `LexicalSemantic`, the baseline's only dimension.
    pub dimension: Dimension,
    pub norm_score: f64,
    pub rule: Rule,
    pub span: usize,
}

/// Outcome for one token position.
#[derive(Debug, Clone, PartialEq)]
pub enum TokenMatch {
    Matched(MatchResult),
    /// Covered by a multiword match that starts at `head`.
    Absorbed {
        head: usize,
    },
    Unmatched,
}

impl TokenMatch {
    pub fn result(&self) -> Option<&MatchResult> {
        match self {
            TokenMatch::Matched(m) => Some(m),
            _ => None,
        }
    }

    /// Matched directly or as part of a phrase.
    pub fn is_covered(&self) -> bool {
        !matches!(self, TokenMatch::Unmatched)
    }
}

/// Unit-cost Levenshtein distance over chars.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            cur[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - distance / max(len)` over lowercased inputs; two empty strings are
/// identical.
pub fn lexical_similarity(a: &str, b: &str) -> f64 {
    let a = a.to_lowercase();
    let b = b.to_lowercase();
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(&a, &b) as f64 / longest as f64
}

// Upper bound of lexical_similarity from lengths alone.
fn length_bound(a: usize, b: usize) -> f64 {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi == 0 {
        1.0
    } else {
        lo as f64 / hi as f64
    }
}

/// Baseline matcher: the most similar term at or above `srm_threshold`.
/// Ties go to the alphabetically first term.
pub fn srm_match<S: AsRef<str>>(root: &str, terms: &[S], config: &MatchConfig) -> Option<MatchResult> {
    let root_lower = root.to_lowercase();
    let root_len = root_lower.chars().count();
    let mut best: Option<(String, f64)> = None;
    for term in terms {
        let term = term.as_ref().to_lowercase();
        if length_bound(root_len, term.chars().count()) + PRUNE_SLACK < config.srm_threshold {
            continue;
        }
        let sim = lexical_similarity(&root_lower, &term);
        if sim < config.srm_threshold {
            continue;
        }
        let better = match &best {
            None => true,
            Some((t, s)) => sim > *s || (sim == *s && term < *t),
        };
        if better {
            best = Some((term, sim));
        }
    }
    best.map(|(term, sim)| MatchResult {
        root: root.to_owned(),
        term,
        dimension: Dimension::LexicalSemantic,
        norm_score: sim,
        rule: Rule::LexicalOnly,
        span: 1,
    })
}

impl AsRef<str> for RootWord {
    fn as_ref(&self) -> &str {
        &self.root
    }
}

/// Candidates per position, each list filtered by `mrm_threshold` and
/// ordered by score descending, dimension priority, term, then longer span.
///
/// A position's candidates come from its own root and from the n-grams
/// (roots joined by one space, up to `ngram_max` long) that start there.
pub fn gather_candidates<R: AsRef<str>>(
    roots: &[R],
    index: &ReferenceIndex,
    config: &MatchConfig,
) -> Vec<Vec<Candidate>> {
    (0..roots.len())
        .map(|i| candidates_at(roots, i, index, config))
        .collect()
}

fn candidates_at<R: AsRef<str>>(
    roots: &[R],
    position: usize,
    index: &ReferenceIndex,
    config: &MatchConfig,
) -> Vec<Candidate> {
    let mut best: BTreeMap<(String, Dimension, usize), f64> = BTreeMap::new();
    let mut offer = |term: &str, dimension: Dimension, span: usize, score: f64| {
        if score < config.mrm_threshold {
            return;
        }
        let slot = best.entry((term.to_owned(), dimension, span)).or_insert(score);
        if score > *slot {
            *slot = score;
        }
    };

    let mut key = String::new();
    for span in 1..=config.ngram_max {
        let Some(root) = roots.get(position + span - 1) else {
            break;
        };
        if span > 1 {
            key.push(' ');
        }
        key.push_str(root.as_ref());
        for (dimension, terms) in index.lookup(&key) {
            for t in terms {
                offer(&t.term, *dimension, span, t.norm_score);
            }
        }
    }

    if config.fuzzy_lexical {
        let root = roots[position].as_ref();
        let root_len = root.chars().count();
        for other in index.lexical_roots() {
            if other == root || length_bound(root_len, other.chars().count()) + PRUNE_SLACK < config.mrm_threshold {
                continue;
            }
            let sim = lexical_similarity(root, other);
            for t in &index.lookup(other)[&Dimension::LexicalSemantic] {
                offer(&t.term, Dimension::LexicalSemantic, 1, t.norm_score * sim);
            }
        }
    }

    let mut out: Vec<Candidate> = best
        .into_iter()
        .map(|((term, dimension, span), norm_score)| Candidate {
            term,
            dimension,
            norm_score,
            span,
        })
        .collect();
    out.sort_by(|a, b| preference(a, b, config));
    out
}

fn preference(a: &Candidate, b: &Candidate, config: &MatchConfig) -> std::cmp::Ordering {
    b.norm_score
        .total_cmp(&a.norm_score)
        .then_with(|| config.priority(a.dimension).cmp(&config.priority(b.dimension)))
        .then_with(|| a.term.cmp(&b.term))
        .then_with(|| b.span.cmp(&a.span))
}

/// Picks one candidate.
///
/// With context precedence on, any synonym (or antonym, when enabled) wins
/// over higher-scoring candidates from other dimensions. Otherwise the
/// highest score wins. Ties fall to dimension priority, then term, then the
/// longer span.
pub fn select_candidate<'a>(candidates: &'a [Candidate], config: &MatchConfig) -> Option<(&'a Candidate, Rule)> {
    let best_of = |pred: &dyn Fn(&Candidate) -> bool| {
        candidates
            .iter()
            .filter(|c| pred(c))
            .min_by(|a, b| preference(a, b, config))
    };
    if config.context_precedence {
        if let Some(c) = best_of(&|c| config.is_context(c.dimension)) {
            return Some((c, Rule::ContextPrecedence));
        }
    }
    best_of(&|_| true).map(|c| (c, Rule::HighestScore))
}

/// Matches a token stream left to right. A selected phrase covering `n`
/// tokens absorbs the `n - 1` positions after it.
pub fn mrm_match<R: AsRef<str>>(roots: &[R], index: &ReferenceIndex, config: &MatchConfig) -> Vec<TokenMatch> {
    let mut out = Vec::with_capacity(roots.len());
    let mut absorbed_until = 0;
    let mut head = 0;
    for position in 0..roots.len() {
        if position < absorbed_until {
            out.push(TokenMatch::Absorbed { head });
            continue;
        }
        let candidates = candidates_at(roots, position, index, config);
        match select_candidate(&candidates, config) {
            Some((c, rule)) => {
                head = position;
                absorbed_until = position + c.span;
                out.push(TokenMatch::Matched(MatchResult {
                    root: roots[position].as_ref().to_owned(),
                    term: c.term.clone(),
                    dimension: c.dimension,
                    norm_score: c.norm_score,
                    rule,
                    span: c.span,
                }));
            }
            None => out.push(TokenMatch::Unmatched),
        }
    }
    out
}

/// Writes one match-dump line:
/// `record_id<TAB>position<TAB>root<TAB>term<TAB>dimension<TAB>norm_score<TAB>rule`.
/// Unmatched tokens carry `-` in the last four columns; absorbed tokens
/// carry `-` and the rule `absorbed`.
pub fn write_match_line<W: Write>(
    out: &mut W,
    record_id: usize,
    position: usize,
    root: &str,
    outcome: &TokenMatch,
) -> std::io::Result<()> {
    let root = tsv::escape(root);
    match outcome {
        TokenMatch::Matched(m) => writeln!(
            out,
            "{record_id}\t{position}\t{root}\t{}\t{}\t{:.4}\t{}",
            tsv::escape(&m.term),
            m.dimension,
            m.norm_score,
            m.rule
        ),
        TokenMatch::Absorbed { .. } => writeln!(out, "{record_id}\t{position}\t{root}\t-\t-\t-\tabsorbed"),
        TokenMatch::Unmatched => writeln!(out, "{record_id}\t{position}\t{root}\t-\t-\t-\t-"),
    }
}
