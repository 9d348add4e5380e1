//! Synthetic inputs shared by the benchmarks.

use mrm_core::ingest::{unify, Origin, Record};
use mrm_core::{
    build_index, Dimension, ReferenceEntry, ReferenceIndex, ScoreScaleConfig, SourceFormat, UnifiedDataset,
};

/// Deterministic pseudo-words: base-26 spellings of `i` with a fixed prefix
/// length so neighbouring words share characters.
pub fn word(i: usize) -> String {
    let mut n = i;
    let mut out = String::from("w");
    loop {
        out.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    out
}

/// An index with `roots` roots, each carrying one entry per dimension.
pub fn synthetic_index(roots: usize) -> ReferenceIndex {
    let entries = (0..roots).flat_map(|i| {
        Dimension::ALL.into_iter().map(move |d| {
            let raw = if d.is_frequency() {
                (i % 1000) as f64
            } else {
                (i % 10) as f64 * 0.5
            };
            ReferenceEntry::new(word(i), word(i + 7), d, raw)
        })
    });
    build_index(entries, &ScoreScaleConfig::default()).expect("synthetic entries are valid")
}

/// `records` records of `words` words drawn from the first `vocab` words.
pub fn synthetic_dataset(records: usize, words: usize, vocab: usize) -> UnifiedDataset {
    let origin = Origin {
        format: SourceFormat::Unstructured,
        path: "synthetic".into(),
    };
    let records = (0..records)
        .map(|r| Record {
            record_id: r,
            fields: vec![(
                "text".into(),
                (0..words)
                    .map(|w| word((r * 31 + w * 17) % vocab))
                    .collect::<Vec<_>>()
                    .join(" "),
            )],
            origin: origin.clone(),
        })
        .collect();
    unify(vec![(records, origin)])
}
