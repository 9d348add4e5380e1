use std::fs;
use std::path::Path;

use super::{normalize_score, Dimension, ReferenceEntry, ScoreScaleConfig};
use crate::error::{Error, Result};
use crate::matcher::lexical_similarity;
use crate::preprocess::{identify_root, tokenize, PreprocessConfig};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Also index sentence pairs word by word: every content word of the
    /// first sentence gets its closest content word of the second sentence.
    pub pair_expansion: bool,
}

/// Lowercases a phrase, splits it at whitespace and ASCII punctuation, and
/// joins the words with single spaces.
pub fn normalize_phrase(text: &str) -> String {
    tokenize(text, &PreprocessConfig::without_stopwords())
        .into_iter()
        .map(|f| f.normalized)
        .collect::<Vec<_>>()
        .join(" ")
}

// Lowercase and collapse whitespace, keeping punctuation.
fn normalize_key(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_dimension_file(path: &Path, dimension: Dimension, options: &ParseOptions) -> Result<Vec<ReferenceEntry>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_owned(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    parse_dimension_str(&text, path, dimension, options)
}

/// Parses dimension-file contents. `path` is only used in error messages.
pub fn parse_dimension_str(
    text: &str,
    path: &Path,
    dimension: Dimension,
    options: &ParseOptions,
) -> Result<Vec<ReferenceEntry>> {
    let mut entries = Vec::new();
    let mut current_head: Option<String> = None;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let err = |message: String| Error::format(path, line_no, message);
        let score = |s: &str| -> Result<f64> {
            let value: f64 = s
                .trim()
                .parse()
                .map_err(|_| err(format!("score `{s}` is not a number")))?;
            if !value.is_finite() || value < 0.0 {
                return Err(err(format!("score `{s}` must be a finite non-negative number")));
            }
            Ok(value)
        };
        let expect_cols = |allowed: &[usize]| -> Result<()> {
            if allowed.contains(&cols.len()) {
                Ok(())
            } else {
                let wanted = allowed.iter().map(usize::to_string).collect::<Vec<_>>().join(" or ");
                Err(err(format!(
                    "expected {wanted} tab-separated columns, found {}",
                    cols.len()
                )))
            }
        };

        let mut pending = Vec::new();
        match dimension {
            Dimension::Synonym | Dimension::Antonym => {
                expect_cols(&[3])?;
                pending.push(ReferenceEntry::new(
                    normalize_key(cols[0]),
                    normalize_key(cols[1]),
                    dimension,
                    score(cols[2])?,
                ));
            }
            Dimension::FormalSemantic | Dimension::LexicalSemantic => {
                expect_cols(&[3])?;
                let raw = score(cols[0])?;
                pending.push(ReferenceEntry::new(
                    normalize_phrase(cols[1]),
                    normalize_phrase(cols[2]),
                    dimension,
                    raw,
                ));
                if options.pair_expansion {
                    pending.extend(expand_pair(cols[1], cols[2], dimension, raw));
                }
            }
            Dimension::WordOrder => {
                expect_cols(&[3, 4])?;
                let phrase = normalize_key(cols[0]);
                let mut entry = ReferenceEntry::new(phrase.clone(), phrase, dimension, score(cols[2])?);
                entry.tag = non_empty(cols[1]);
                entry.example = cols.get(3).and_then(|s| non_empty(s));
                pending.push(entry);
            }
            Dimension::CoOccurrence => {
                expect_cols(&[4, 5])?;
                let head = normalize_key(cols[0]);
                if !head.is_empty() {
                    current_head = Some(head);
                }
                let Some(head) = current_head.clone() else {
                    return Err(err("continuation row before any head word".into()));
                };
                let mut entry = ReferenceEntry::new(head, normalize_key(cols[1]), dimension, score(cols[3])?);
                entry.tag = non_empty(cols[2]);
                entry.example = cols.get(4).and_then(|s| non_empty(s));
                pending.push(entry);
            }
        }

        for entry in pending {
            if entry.root.is_empty() || entry.term.is_empty() {
                return Err(err("empty root or term".into()));
            }
            entries.push(entry);
        }
    }

    let mut scales = ScoreScaleConfig::default();
    if dimension.is_frequency() {
        let max = entries.iter().map(|e| e.raw_score).fold(0.0, f64::max);
        if max > 0.0 {
            scales.set_frequency_reference(dimension, max);
        }
    }
    for entry in &mut entries {
        entry.norm_score = normalize_score(entry.raw_score, dimension, &scales)?;
    }
    Ok(entries)
}

fn non_empty(s: &str) -> Option<String> {
    let s = s.trim();
    (!s.is_empty()).then(|| s.to_owned())
}

fn expand_pair(first: &str, second: &str, dimension: Dimension, raw: f64) -> Vec<ReferenceEntry> {
    let config = PreprocessConfig::default();
    let mut counterparts: Vec<String> = tokenize(second, &config).into_iter().map(|f| f.normalized).collect();
    counterparts.sort();
    counterparts.dedup();
    if counterparts.is_empty() {
        return Vec::new();
    }

    let mut out = Vec::new();
    for word in tokenize(first, &config) {
        // Highest similarity; ties go to the alphabetically first counterpart.
        let mut best: Option<(&str, f64)> = None;
        for candidate in &counterparts {
            let sim = lexical_similarity(&word.normalized, candidate);
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((candidate, sim));
            }
        }
        let (term, _) = best.expect("counterparts is non-empty");
        out.push(ReferenceEntry::new(
            identify_root(&word.normalized, &config),
            term,
            dimension,
            raw,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, dimension: Dimension) -> Result<Vec<ReferenceEntry>> {
        parse_dimension_str(text, Path::new("test.tsv"), dimension, &ParseOptions::default())
    }

    #[test]
    fn synonym_line() {
        let entries = parse("smart\tintelligent\t9.2\n", Dimension::Synonym).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].root, "smart");
        assert_eq!(entries[0].term, "intelligent");
        assert_eq!(entries[0].raw_score, 9.2);
        assert!((entries[0].norm_score - 0.92).abs() < 1e-12);
    }

    #[test]
    fn antonym_line() {
        let entries = parse("Happy\tMad\t0.95\r\n", Dimension::Antonym).unwrap();
        assert_eq!((entries[0].root.as_str(), entries[0].term.as_str()), ("happy", "mad"));
        assert_eq!(entries[0].raw_score, 0.95);
    }

    #[test]
    fn non_numeric_score_cites_line() {
        let err = parse("# comment\nsmart\tintelligent\thigh\n", Dimension::Synonym).unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err_line(parse("a\tb\t-1\n", Dimension::Synonym)) == Some(1));
    }

    fn err_line(r: Result<Vec<ReferenceEntry>>) -> Option<usize> {
        match r {
            Err(Error::Format { line, .. }) => Some(line),
            _ => None,
        }
    }

    #[test]
    fn wrong_column_count() {
        assert_eq!(err_line(parse("smart\tintelligent\n", Dimension::Synonym)), Some(1));
        assert_eq!(err_line(parse("a\tb\tc\t1\t2\t3\n", Dimension::CoOccurrence)), Some(1));
    }

    #[test]
    fn empty_file_is_empty() {
        assert!(parse("", Dimension::Synonym).unwrap().is_empty());
        assert!(parse("# only a comment\n\n", Dimension::WordOrder).unwrap().is_empty());
    }

    #[test]
    fn sentence_pairs_are_phrase_level() {
        let entries = parse(
            "3\tTurkish riot police tear gas Taksim Square protest\tTurkish riot police enter Taksim Square\n",
            Dimension::FormalSemantic,
        )
        .unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].root, "turkish riot police tear gas taksim square protest");
        assert_eq!(entries[0].term, "turkish riot police enter taksim square");
        assert!((entries[0].norm_score - 0.6).abs() < 1e-12);
    }

    #[test]
    fn pair_expansion_adds_word_entries() {
        let options = ParseOptions { pair_expansion: true };
        let entries = parse_dimension_str(
            "4\tPolice fires\tpolice fire the gas\n1\tcat\tHat bat\n",
            Path::new("t"),
            Dimension::LexicalSemantic,
            &options,
        )
        .unwrap();
        let pairs: Vec<(&str, &str, f64)> = entries
            .iter()
            .map(|e| (e.root.as_str(), e.term.as_str(), e.raw_score))
            .collect();
        // "cat" is one edit from both "bat" and "hat"; the tie goes to "bat".
        assert_eq!(
            pairs,
            [
                ("police fires", "police fire the gas", 4.0),
                ("police", "police", 4.0),
                ("fire", "fire", 4.0),
                ("cat", "hat bat", 1.0),
                ("cat", "bat", 1.0),
            ]
        );
    }

    #[test]
    fn word_order_entry() {
        let entries = parse(
            "as well\tAVP\t5754\tCan I just say something else as well?\n",
            Dimension::WordOrder,
        )
        .unwrap();
        assert_eq!(entries[0].root, "as well");
        assert_eq!(entries[0].term, "as well");
        assert_eq!(entries[0].tag.as_deref(), Some("AVP"));
        assert_eq!(entries[0].norm_score, 1.0);
        let no_example = parse("come on\tINT\t1778\n", Dimension::WordOrder).unwrap();
        assert_eq!(no_example[0].example, None);
    }

    #[test]
    fn co_occurrence_rows_inherit_head() {
        let text = "well\tas well\tAVP\t5754\tx\n\tvery well\tAP/AVP\t987\ty\n";
        let entries = parse(text, Dimension::CoOccurrence).unwrap();
        assert_eq!(entries[1].root, "well");
        assert_eq!(entries[1].term, "very well");
        assert_eq!(
            err_line(parse("\tvery well\tAP\t12\n", Dimension::CoOccurrence)),
            Some(1)
        );
    }

    #[test]
    fn phrase_normalization() {
        assert_eq!(normalize_phrase("Snowden's hits  hurdles!"), "snowden s hits hurdles");
    }
}
