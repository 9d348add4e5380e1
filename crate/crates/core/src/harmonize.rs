//! Dataset-level matching and the harmonized outputs built from it: the
//! match dump, the harmonized copy of the dataset, and a summary report.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::eval::percentage_hundredths;
use crate::eval::Fixed2;
use crate::ingest::UnifiedDataset;
use crate::matcher::{mrm_match, write_match_line, MatchConfig, Rule, TokenMatch};
use crate::preprocess::{field_roots, PreprocessConfig, RootWord};
use crate::refmodel::{Dimension, ReferenceIndex};

/// Tokens and match outcomes of one field value.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMatches {
    pub record_id: usize,
    pub field_index: usize,
    pub tokens: Vec<RootWord>,
    pub outcomes: Vec<TokenMatch>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMatches {
    pub fields: Vec<FieldMatches>,
}

/// Runs the multidimensional matcher over every field of every record.
/// Multiword lookups never cross field boundaries.
pub fn match_dataset(
    dataset: &UnifiedDataset,
    index: &ReferenceIndex,
    preprocess: &PreprocessConfig,
    matching: &MatchConfig,
) -> DatasetMatches {
    let mut fields = Vec::new();
    for record in &dataset.records {
        for (field_index, (name, value)) in record.fields.iter().enumerate() {
            let tokens = field_roots(record.record_id, name, value, preprocess);
            let outcomes = mrm_match(&tokens, index, matching);
            fields.push(FieldMatches {
                record_id: record.record_id,
                field_index,
                tokens,
                outcomes,
            });
        }
    }
    DatasetMatches { fields }
}

/// Replaces each matched token (and the tokens its phrase absorbs) with the
/// selected term, leaving all other text untouched. Returns the new text and
/// the number of token units it holds.
pub fn harmonize_field(value: &str, tokens: &[RootWord], outcomes: &[TokenMatch]) -> (String, usize) {
    let mut out = String::with_capacity(value.len());
    let mut cursor = 0;
    let mut units = 0;
    for (i, outcome) in outcomes.iter().enumerate() {
        match outcome {
            TokenMatch::Matched(m) => {
                let start = tokens[i].source.start;
                let last = (i + m.span - 1).min(tokens.len() - 1);
                out.push_str(&value[cursor..start]);
                out.push_str(&m.term);
                cursor = tokens[last].source.end;
                units += 1;
            }
            TokenMatch::Unmatched => units += 1,
            TokenMatch::Absorbed { .. } => {}
        }
    }
    out.push_str(&value[cursor..]);
    (out, units)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HarmonizationReport {
    pub records: usize,
    pub tokens: usize,
    pub matched: usize,
    pub absorbed: usize,
    pub unmatched: usize,
    /// Share of tokens covered by a match, directly or through a phrase.
    pub matched_pct: Fixed2,
    pub by_dimension: BTreeMap<Dimension, usize>,
    pub by_rule: BTreeMap<Rule, usize>,
}

impl HarmonizationReport {
    pub fn write_to<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "records\t{}", self.records)?;
        writeln!(out, "tokens\t{}", self.tokens)?;
        writeln!(out, "matched\t{}", self.matched)?;
        writeln!(out, "absorbed\t{}", self.absorbed)?;
        writeln!(out, "unmatched\t{}", self.unmatched)?;
        writeln!(out, "matched_pct\t{}", self.matched_pct)?;
        for (dimension, count) in &self.by_dimension {
            writeln!(out, "dimension\t{dimension}\t{count}")?;
        }
        for (rule, count) in &self.by_rule {
            writeln!(out, "rule\t{rule}\t{count}")?;
        }
        Ok(())
    }
}

impl DatasetMatches {
    pub fn token_count(&self) -> usize {
        self.fields.iter().map(|f| f.tokens.len()).sum()
    }

    pub fn outcomes(&self) -> impl Iterator<Item = &TokenMatch> {
        self.fields.iter().flat_map(|f| f.outcomes.iter())
    }

    /// Writes the match dump. Positions count tokens across all fields of a
    /// record, in field order.
    pub fn write_dump<W: Write>(&self, out: &mut W) -> io::Result<()> {
        let mut record = usize::MAX;
        let mut position = 0;
        for field in &self.fields {
            if field.record_id != record {
                record = field.record_id;
                position = 0;
            }
            for (token, outcome) in field.tokens.iter().zip(&field.outcomes) {
                write_match_line(out, field.record_id, position, &token.root, outcome)?;
                position += 1;
            }
        }
        Ok(())
    }

    /// A copy of `dataset` with matched text replaced by selected terms.
    ///
    /// `dataset` must be the one these matches were computed from.
    pub fn harmonize(&self, dataset: &UnifiedDataset) -> UnifiedDataset {
        let mut harmonized = dataset.clone();
        for field in &self.fields {
            let record = &mut harmonized.records[field.record_id];
            let value = &mut record.fields[field.field_index].1;
            *value = harmonize_field(value, &field.tokens, &field.outcomes).0;
        }
        harmonized
    }

    pub fn report(&self, dataset: &UnifiedDataset) -> HarmonizationReport {
        let mut report = HarmonizationReport {
            records: dataset.len(),
            tokens: self.token_count(),
            by_dimension: Dimension::ALL.iter().map(|d| (*d, 0)).collect(),
            by_rule: [Rule::ContextPrecedence, Rule::HighestScore]
                .iter()
                .map(|r| (*r, 0))
                .collect(),
            ..HarmonizationReport::default()
        };
        for outcome in self.outcomes() {
            match outcome {
                TokenMatch::Matched(m) => {
                    report.matched += 1;
                    *report.by_dimension.entry(m.dimension).or_default() += 1;
                    *report.by_rule.entry(m.rule).or_default() += 1;
                }
                TokenMatch::Absorbed { .. } => report.absorbed += 1,
                TokenMatch::Unmatched => report.unmatched += 1,
            }
        }
        report.matched_pct = Fixed2::from_hundredths(
            percentage_hundredths((report.matched + report.absorbed) as u64, report.tokens as u64)
                .expect("covered tokens never exceed total tokens"),
        );
        report
    }
}
