//! Brute-force reference matcher. Scans every index entry for every position
//! and shares no code with the library beyond its data types.

use mrm_core::refmodel::ReferenceIndex;
use mrm_core::{Dimension, MatchConfig, Rule};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Matched {
        term: String,
        dimension: Dimension,
        score: f64,
        rule: Rule,
        span: usize,
    },
    Absorbed,
    Unmatched,
}

pub fn distance(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let substitute = distance(ra, rb) + usize::from(x != y);
            substitute.min(distance(ra, b) + 1).min(distance(a, rb) + 1)
        }
    }
}

// Iterative table for longer strings; checked against `distance` in tests.
pub fn distance_table(a: &[char], b: &[char]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    let max = a.len().max(b.len());
    if max == 0 {
        return 1.0;
    }
    let d = if a.len() + b.len() <= 12 {
        distance(&a, &b)
    } else {
        distance_table(&a, &b)
    };
    1.0 - d as f64 / max as f64
}

struct Cand {
    term: String,
    dimension: Dimension,
    score: f64,
    span: usize,
}

fn rank(config: &MatchConfig, d: Dimension) -> usize {
    config.dimension_priority.iter().position(|x| *x == d).unwrap()
}

// True when `a` should be chosen over `b`.
fn beats(a: &Cand, b: &Cand, config: &MatchConfig) -> bool {
    if a.score != b.score {
        return a.score > b.score;
    }
    let (ra, rb) = (rank(config, a.dimension), rank(config, b.dimension));
    if ra != rb {
        return ra < rb;
    }
    if a.term != b.term {
        return a.term < b.term;
    }
    a.span > b.span
}

fn is_context(d: Dimension, config: &MatchConfig) -> bool {
    d == Dimension::Synonym || (d == Dimension::Antonym && config.antonym_context)
}

pub fn brute_force(roots: &[String], index: &ReferenceIndex, config: &MatchConfig) -> Vec<Outcome> {
    let entries: Vec<_> = index.entries().collect();
    let mut out = Vec::new();
    let mut skip = 0;
    for p in 0..roots.len() {
        if skip > 0 {
            skip -= 1;
            out.push(Outcome::Absorbed);
            continue;
        }
        let mut cands = Vec::new();
        for span in 1..=config.ngram_max {
            if p + span > roots.len() {
                break;
            }
            let key = roots[p..p + span].join(" ");
            for e in &entries {
                if e.root == key && e.term.norm_score >= config.mrm_threshold {
                    cands.push(Cand {
                        term: e.term.term.clone(),
                        dimension: e.dimension,
                        score: e.term.norm_score,
                        span,
                    });
                }
            }
        }
        if config.fuzzy_lexical {
            for e in &entries {
                if e.dimension != Dimension::LexicalSemantic {
                    continue;
                }
                let score = e.term.norm_score * similarity(&roots[p], e.root);
                if score >= config.mrm_threshold {
                    cands.push(Cand {
                        term: e.term.term.clone(),
                        dimension: e.dimension,
                        score,
                        span: 1,
                    });
                }
            }
        }
        let context_only = config.context_precedence && cands.iter().any(|c| is_context(c.dimension, config));
        let mut best: Option<&Cand> = None;
        for c in &cands {
            if context_only && !is_context(c.dimension, config) {
                continue;
            }
            if best.is_none_or(|b| beats(c, b, config)) {
                best = Some(c);
            }
        }
        match best {
            Some(c) => {
                skip = c.span - 1;
                out.push(Outcome::Matched {
                    term: c.term.clone(),
                    dimension: c.dimension,
                    score: c.score,
                    rule: if context_only {
                        Rule::ContextPrecedence
                    } else {
                        Rule::HighestScore
                    },
                    span: c.span,
                });
            }
            None => out.push(Outcome::Unmatched),
        }
    }
    out
}

pub fn from_library(matches: &[mrm_core::TokenMatch]) -> Vec<Outcome> {
    matches
        .iter()
        .map(|m| match m {
            mrm_core::TokenMatch::Matched(r) => Outcome::Matched {
                term: r.term.clone(),
                dimension: r.dimension,
                score: r.norm_score,
                rule: r.rule,
                span: r.span,
            },
            mrm_core::TokenMatch::Absorbed { .. } => Outcome::Absorbed,
            mrm_core::TokenMatch::Unmatched => Outcome::Unmatched,
        })
        .collect()
}
