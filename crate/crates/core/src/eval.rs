//! Batch evaluation: cumulative prefix batches, matched-term percentages for
//! the baseline and multidimensional matchers, and per-dataset averages.
//!
//! All reported decimals are held as exact hundredths ([`Fixed2`]) so that
//! rounding is half away from zero on the true quotient, never on a binary
//! float approximation of it.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Write};

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ingest::UnifiedDataset;
use crate::matcher::{mrm_match, srm_match, MatchConfig};
use crate::preprocess::{field_roots, PreprocessConfig};
use crate::refmodel::ReferenceIndex;
use crate::tsv;

pub const DEFAULT_BATCHES: usize = 5;

/// A decimal with exactly two fractional digits, stored in hundredths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed2(i64);

impl Fixed2 {
    pub const ZERO: Fixed2 = Fixed2(0);

    pub fn from_hundredths(hundredths: i64) -> Self {
        Fixed2(hundredths)
    }

    pub fn from_int(value: i64) -> Self {
        Fixed2(value * 100)
    }

    pub fn hundredths(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Mean of `values`, rounded half away from zero.
    pub fn mean(values: &[Fixed2]) -> Option<Fixed2> {
        if values.is_empty() {
            return None;
        }
        let sum: i128 = values.iter().map(|v| v.0 as i128).sum();
        Some(Fixed2(round_div(sum, values.len() as i128) as i64))
    }
}

impl fmt::Display for Fixed2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

fn round_div(numerator: i128, denominator: i128) -> i128 {
    debug_assert!(denominator > 0);
    let q = (2 * numerator.abs() + denominator) / (2 * denominator);
    if numerator < 0 {
        -q
    } else {
        q
    }
}

/// `100 * matched / total` in hundredths, rounded half away from zero.
pub fn percentage_hundredths(matched: u64, total: u64) -> Result<i64> {
    if matched > total {
        return Err(Error::Domain(format!("matched ({matched}) exceeds total ({total})")));
    }
    if total == 0 {
        return Ok(0);
    }
    Ok(round_div(10_000 * matched as i128, total as i128) as i64)
}

/// Matched-term percentage rounded to two decimals.
pub fn matched_percentage(matched: u64, total: u64) -> Result<f64> {
    percentage_hundredths(matched, total).map(|h| Fixed2(h).to_f64())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    /// 1-based.
    pub ordinal: usize,
    pub record_ids: Vec<usize>,
    pub fraction: f64,
}

/// Cumulative batch sizes: `floor(k * n / count)` for `k < count`, then `n`.
pub fn batch_sizes(n: usize, count: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Domain("cannot batch an empty dataset".into()));
    }
    if count == 0 {
        return Err(Error::Domain("batch count must be at least 1".into()));
    }
    Ok((1..=count)
        .map(|k| if k == count { n } else { k * n / count })
        .collect())
}

/// Five nested prefix batches of the dataset's records.
pub fn partition_batches(dataset: &UnifiedDataset) -> Result<Vec<Batch>> {
    partition_batches_n(dataset, DEFAULT_BATCHES)
}

pub fn partition_batches_n(dataset: &UnifiedDataset, count: usize) -> Result<Vec<Batch>> {
    let ids: Vec<usize> = dataset.records.iter().map(|r| r.record_id).collect();
    Ok(batch_sizes(ids.len(), count)?
        .into_iter()
        .enumerate()
        .map(|(i, size)| Batch {
            ordinal: i + 1,
            record_ids: ids[..size].to_vec(),
            fraction: (i + 1) as f64 / count as f64,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    Srm,
    Mrm,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Srm => "SRM",
            Model::Mrm => "MRM",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BatchLabel {
    Batch(usize),
    Average,
}

impl fmt::Display for BatchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchLabel::Batch(k) => write!(f, "batch{k}"),
            BatchLabel::Average => f.write_str("average"),
        }
    }
}

/// One line of the comparison table. Batch rows hold whole counts; average
/// rows hold two-decimal means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub dataset: String,
    pub batch: BatchLabel,
    pub model: Model,
    pub total_terms: Fixed2,
    pub matched_terms: Fixed2,
    pub matched_pct: Fixed2,
}

impl ComparisonRow {
    pub fn from_counts(dataset: &str, batch: BatchLabel, model: Model, matched: u64, total: u64) -> Result<Self> {
        Ok(ComparisonRow {
            dataset: dataset.to_owned(),
            batch,
            model,
            total_terms: Fixed2::from_int(total as i64),
            matched_terms: Fixed2::from_int(matched as i64),
            matched_pct: Fixed2(percentage_hundredths(matched, total)?),
        })
    }

    fn count_text(&self, value: Fixed2) -> String {
        match self.batch {
            BatchLabel::Batch(_) => (value.0 / 100).to_string(),
            BatchLabel::Average => value.to_string(),
        }
    }

    fn count_json(&self, value: Fixed2) -> Value {
        match self.batch {
            BatchLabel::Batch(_) => Value::from(value.0 / 100),
            BatchLabel::Average => Value::from(value.to_f64()),
        }
    }
}

/// Mean total, mean matched, and mean of the per-batch percentages.
pub fn average_batches(rows: &[ComparisonRow]) -> Result<ComparisonRow> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Domain("cannot average zero rows".into()))?;
    if rows
        .iter()
        .any(|r| r.dataset != first.dataset || r.model != first.model)
    {
        return Err(Error::Domain("averaged rows must share dataset and model".into()));
    }
    let mean = |f: fn(&ComparisonRow) -> Fixed2| {
        Fixed2::mean(&rows.iter().map(f).collect::<Vec<_>>()).expect("rows is non-empty")
    };
    Ok(ComparisonRow {
        dataset: first.dataset.clone(),
        batch: BatchLabel::Average,
        model: first.model,
        total_terms: mean(|r| r.total_terms),
        matched_terms: mean(|r| r.matched_terms),
        matched_pct: mean(|r| r.matched_pct),
    })
}

/// What a "term" is when counting totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermCounting {
    /// Every token after preprocessing.
    #[default]
    Tokens,
    /// Distinct roots; a root counts as matched if any occurrence is.
    DistinctRoots,
}

impl std::str::FromStr for TermCounting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "tokens" => Ok(TermCounting::Tokens),
            "distinct_roots" | "roots" => Ok(TermCounting::DistinctRoots),
            _ => Err(Error::Config(format!("unknown term counting `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub batches: usize,
    pub counting: TermCounting,
    pub preprocess: PreprocessConfig,
    pub matching: MatchConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            batches: DEFAULT_BATCHES,
            counting: TermCounting::default(),
            preprocess: PreprocessConfig::default(),
            matching: MatchConfig::default(),
        }
    }
}

/// Per-token match flags for one record, in field order.
struct RecordOutcome {
    roots: Vec<String>,
    srm: Vec<bool>,
    mrm: Vec<bool>,
}

/// Runs both matchers over the dataset and emits, for every batch, an SRM
/// row then an MRM row, followed by the SRM and MRM averages.
pub fn run_experiment<S: AsRef<str>>(
    name: &str,
    dataset: &UnifiedDataset,
    srm_terms: &[S],
    index: &ReferenceIndex,
    config: &ExperimentConfig,
) -> Result<Vec<ComparisonRow>> {
    config.matching.validate()?;
    let batches = partition_batches_n(dataset, config.batches)?;

    let mut srm_cache: HashMap<String, bool> = HashMap::new();
    let outcomes: Vec<RecordOutcome> = dataset
        .records
        .iter()
        .map(|record| {
            let mut outcome = RecordOutcome {
                roots: Vec::new(),
                srm: Vec::new(),
                mrm: Vec::new(),
            };
            for (name, value) in &record.fields {
                let tokens = field_roots(record.record_id, name, value, &config.preprocess);
                let mrm = mrm_match(&tokens, index, &config.matching);
                for (token, m) in tokens.iter().zip(&mrm) {
                    let srm = *srm_cache
                        .entry(token.root.clone())
                        .or_insert_with(|| srm_match(&token.root, srm_terms, &config.matching).is_some());
                    outcome.srm.push(srm);
                    outcome.mrm.push(m.is_covered());
                }
                outcome.roots.extend(tokens.into_iter().map(|t| t.root));
            }
            outcome
        })
        .collect();

    let mut rows = Vec::with_capacity(2 * batches.len() + 2);
    let mut tally = Tally::new(config.counting);
    let mut consumed = 0;
    for batch in &batches {
        for outcome in &outcomes[consumed..batch.record_ids.len()] {
            tally.add(outcome);
        }
        consumed = batch.record_ids.len();
        let label = BatchLabel::Batch(batch.ordinal);
        let (total, srm, mrm) = tally.counts();
        rows.push(ComparisonRow::from_counts(name, label, Model::Srm, srm, total)?);
        rows.push(ComparisonRow::from_counts(name, label, Model::Mrm, mrm, total)?);
    }
    for model in [Model::Srm, Model::Mrm] {
        let per_batch: Vec<ComparisonRow> = rows.iter().filter(|r| r.model == model).cloned().collect();
        rows.push(average_batches(&per_batch)?);
    }
    Ok(rows)
}

struct Tally {
    counting: TermCounting,
    tokens: u64,
    srm: u64,
    mrm: u64,
    roots: BTreeSet<String>,
    srm_roots: BTreeSet<String>,
    mrm_roots: BTreeSet<String>,
}

impl Tally {
    fn new(counting: TermCounting) -> Self {
        Tally {
            counting,
            tokens: 0,
            srm: 0,
            mrm: 0,
            roots: BTreeSet::new(),
            srm_roots: BTreeSet::new(),
            mrm_roots: BTreeSet::new(),
        }
    }

    fn add(&mut self, outcome: &RecordOutcome) {
        for ((root, &srm), &mrm) in outcome.roots.iter().zip(&outcome.srm).zip(&outcome.mrm) {
            match self.counting {
                TermCounting::Tokens => {
                    self.tokens += 1;
                    self.srm += srm as u64;
                    self.mrm += mrm as u64;
                }
                TermCounting::DistinctRoots => {
                    self.roots.insert(root.clone());
                    if srm {
                        self.srm_roots.insert(root.clone());
                    }
                    if mrm {
                        self.mrm_roots.insert(root.clone());
                    }
                }
            }
        }
    }

    fn counts(&self) -> (u64, u64, u64) {
        match self.counting {
            TermCounting::Tokens => (self.tokens, self.srm, self.mrm),
            TermCounting::DistinctRoots => (
                self.roots.len() as u64,
                self.srm_roots.len() as u64,
                self.mrm_roots.len() as u64,
            ),
        }
    }
}

pub const COMPARISON_HEADER: &str = "dataset\tbatch\tmodel\ttotal\tmatched\tpct";

pub fn write_comparison_tsv<W: Write>(rows: &[ComparisonRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{COMPARISON_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            tsv::escape(&row.dataset),
            row.batch,
            row.model,
            row.count_text(row.total_terms),
            row.count_text(row.matched_terms),
            row.matched_pct
        )?;
    }
    Ok(())
}

/// The comparison table as `dataset -> batch -> model -> {total, matched, pct}`.
pub fn comparison_json(rows: &[ComparisonRow]) -> Value {
    let mut root = Map::new();
    for row in rows {
        let dataset = root
            .entry(row.dataset.clone())
            .or_insert_with(|| Value::Object(Map::new()));
        let batch = dataset
            .as_object_mut()
            .expect("dataset node is an object")
            .entry(row.batch.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        let mut cell = Map::new();
        cell.insert("total".into(), row.count_json(row.total_terms));
        cell.insert("matched".into(), row.count_json(row.matched_terms));
        cell.insert("pct".into(), Value::from(row.matched_pct.to_f64()));
        batch
            .as_object_mut()
            .expect("batch node is an object")
            .insert(row.model.to_string(), Value::Object(cell));
    }
    Value::Object(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{unify, Origin, Record, SourceFormat};
    use crate::refmodel::{build_index, Dimension, ReferenceEntry, ScoreScaleConfig};
    use proptest::prelude::*;
    use std::path::PathBuf;

    #[test]
    fn percentage_examples() {
        assert_eq!(matched_percentage(1212, 2564).unwrap(), 47.27);
        assert_eq!(matched_percentage(2080, 2564).unwrap(), 81.12);
        assert_eq!(matched_percentage(0, 100).unwrap(), 0.0);
        assert_eq!(matched_percentage(0, 0).unwrap(), 0.0);
        assert!(matches!(matched_percentage(3, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn rounds_half_away_from_zero() {
        // 1/8 = 12.5%, 1/16 = 6.25%, 1/32 = 3.125%
        assert_eq!(percentage_hundredths(1, 8).unwrap(), 1250);
        assert_eq!(percentage_hundredths(1, 32).unwrap(), 313);
        assert_eq!(percentage_hundredths(1, 160_000).unwrap(), 0);
        assert_eq!(percentage_hundredths(1, 20_000).unwrap(), 1);
        assert_eq!(round_div(-5, 2), -3);
    }

    #[test]
    fn fixed2_display() {
        assert_eq!(Fixed2(4727).to_string(), "47.27");
        assert_eq!(Fixed2(5).to_string(), "0.05");
        assert_eq!(Fixed2(-5).to_string(), "-0.05");
        assert_eq!(Fixed2::from_int(49).to_string(), "49.00");
    }

    #[test]
    fn batch_size_examples() {
        assert_eq!(batch_sizes(12820, 5).unwrap()[0], 2564);
        assert_eq!(batch_sizes(82, 5).unwrap(), [16, 32, 49, 65, 82]);
        assert_eq!(batch_sizes(5, 5).unwrap(), [1, 2, 3, 4, 5]);
        assert_eq!(batch_sizes(3, 5).unwrap(), [0, 1, 1, 2, 3]);
        assert!(batch_sizes(0, 5).is_err());
        assert!(partition_batches(&UnifiedDataset::default()).is_err());
    }

    #[test]
    fn average_examples() {
        let row = |pct: i64, total: i64| ComparisonRow {
            dataset: "d".into(),
            batch: BatchLabel::Batch(1),
            model: Model::Srm,
            total_terms: Fixed2::from_int(total),
            matched_terms: Fixed2::ZERO,
            matched_pct: Fixed2(pct),
        };
        let avg = average_batches(&[row(4727, 16), row(4372, 82)]).unwrap();
        assert_eq!(avg.matched_pct.to_string(), "45.50");
        assert_eq!(avg.total_terms.to_string(), "49.00");
        assert_eq!(avg.batch, BatchLabel::Average);
        let same = average_batches(&vec![row(1000, 10); 5]).unwrap();
        assert_eq!(same.matched_pct.to_string(), "10.00");
        assert!(average_batches(&[]).is_err());
        let mut other = row(1, 1);
        other.model = Model::Mrm;
        assert!(average_batches(&[row(1, 1), other]).is_err());
    }

    fn dataset(texts: &[&str]) -> UnifiedDataset {
        let origin = Origin {
            format: SourceFormat::Unstructured,
            path: PathBuf::from("t.txt"),
        };
        let records = texts
            .iter()
            .map(|t| Record {
                record_id: 0,
                fields: vec![("text".into(), t.to_string())],
                origin: origin.clone(),
            })
            .collect();
        unify(vec![(records, origin)])
    }

    fn synonyms(roots: &[&str]) -> ReferenceIndex {
        build_index(
            roots
                .iter()
                .map(|r| ReferenceEntry::new(*r, format!("{r}x"), Dimension::Synonym, 9.0)),
            &ScoreScaleConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn full_coverage_gives_one_hundred() {
        let data = dataset(&["red fox", "blue", "red cow", "fox", "cow blue"]);
        let index = synonyms(&["red", "fox", "blue", "cow"]);
        let rows = run_experiment("toy", &data, &[] as &[&str], &index, &ExperimentConfig::default()).unwrap();
        assert_eq!(rows.len(), 12);
        for row in rows.iter().filter(|r| r.model == Model::Mrm) {
            assert_eq!(row.matched_pct.to_string(), "100.00");
        }
        for row in rows.iter().filter(|r| r.model == Model::Srm) {
            assert_eq!(row.matched_pct, Fixed2::ZERO);
        }
    }

    #[test]
    fn no_coverage_gives_zero() {
        let data = dataset(&["qqq", "www"]);
        let index = synonyms(&["red"]);
        let rows = run_experiment("toy", &data, &["zzzzzz"], &index, &ExperimentConfig::default()).unwrap();
        assert!(rows.iter().all(|r| r.matched_pct == Fixed2::ZERO));
    }

    #[test]
    fn row_order_and_shared_totals() {
        let data = dataset(&["red fox", "blue", "red cow", "fox", "cow blue"]);
        let index = synonyms(&["red"]);
        let rows = run_experiment("toy", &data, &["fox"], &index, &ExperimentConfig::default()).unwrap();
        let labels: Vec<String> = rows.iter().map(|r| format!("{} {}", r.batch, r.model)).collect();
        assert_eq!(labels[0], "batch1 SRM");
        assert_eq!(labels[1], "batch1 MRM");
        assert_eq!(labels[9], "batch5 MRM");
        assert_eq!(labels[10], "average SRM");
        assert_eq!(labels[11], "average MRM");
        for pair in rows[..10].chunks(2) {
            assert_eq!(pair[0].total_terms, pair[1].total_terms);
        }
        // tokens: 2, 3, 5, 6, 8 ; red at 1,3 ; fox at 1,4
        let totals: Vec<String> = rows[..10]
            .iter()
            .step_by(2)
            .map(|r| r.count_text(r.total_terms))
            .collect();
        assert_eq!(totals, ["2", "3", "5", "6", "8"]);
        assert_eq!(rows[8].matched_terms, Fixed2::from_int(2));
        assert_eq!(rows[9].matched_terms, Fixed2::from_int(2));
    }

    #[test]
    fn distinct_root_counting() {
        let data = dataset(&["red red fox", "red"]);
        let index = synonyms(&["red"]);
        let config = ExperimentConfig {
            counting: TermCounting::DistinctRoots,
            ..ExperimentConfig::default()
        };
        let rows = run_experiment("toy", &data, &["fox"], &index, &config).unwrap();
        let last_mrm = &rows[9];
        assert_eq!(
            (last_mrm.total_terms, last_mrm.matched_terms),
            (Fixed2::from_int(2), Fixed2::from_int(1))
        );
    }

    #[test]
    fn tsv_and_json() {
        let rows = vec![
            ComparisonRow::from_counts("ace", BatchLabel::Batch(1), Model::Srm, 1212, 2564).unwrap(),
            ComparisonRow {
                dataset: "ace".into(),
                batch: BatchLabel::Average,
                model: Model::Srm,
                total_terms: Fixed2::from_int(7692),
                matched_terms: Fixed2(345760),
                matched_pct: Fixed2(4557),
            },
        ];
        let mut out = Vec::new();
        write_comparison_tsv(&rows, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "dataset\tbatch\tmodel\ttotal\tmatched\tpct\n\
             ace\tbatch1\tSRM\t2564\t1212\t47.27\n\
             ace\taverage\tSRM\t7692.00\t3457.60\t45.57\n"
        );
        let json = comparison_json(&rows);
        assert_eq!(json["ace"]["batch1"]["SRM"]["matched"], 1212);
        assert_eq!(json["ace"]["average"]["SRM"]["pct"], 45.57);
    }

    proptest! {
        #[test]
        fn percentage_matches_exact_rational(total in 1u64..1_000_000, frac in 0.0f64..=1.0) {
            let matched = ((total as f64) * frac).floor() as u64;
            let h = percentage_hundredths(matched, total).unwrap() as i128;
            // |100 * matched / total - h / 100| <= 1/200, checked in integers.
            let diff = (10_000 * matched as i128 - h * total as i128).abs();
            prop_assert!(2 * diff <= total as i128);
        }

        #[test]
        fn batches_are_nested_prefixes(n in 1usize..500, count in 1usize..10) {
            let sizes = batch_sizes(n, count).unwrap();
            prop_assert_eq!(sizes.len(), count);
            prop_assert_eq!(*sizes.last().unwrap(), n);
            prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
