//! Compiled index file.
//!
//! Layout:
//!
//! ```text
//! mrm-index 1\n
//! synonym_max=<f64>\n
//! antonym_max=<f64>\n
//! semantic_max=<f64>\n
//! word_order_reference=<f64>\n
//! co_occurrence_reference=<f64>\n
//! entries=<count>\n
//! \n
//! <count> entry records, in storage order (root, dimension, score desc, term)
//! ```
//!
//! Each record is `str root | u8 dimension | str term | f64 raw_score |
//! opt tag | opt example`, where `str` is a little-endian `u32` byte length
//! followed by UTF-8 bytes, `f64` is little-endian IEEE-754, and `opt` is a
//! `u8` presence flag followed by a `str` when the flag is 1. Normalized
//! scores are not stored; they are recomputed from the header scales.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dimension, ReferenceEntry, ReferenceIndex, ScoreScaleConfig};
use crate::error::{Error, Result};

pub const INDEX_MAGIC: &str = "mrm-index 1";

pub fn write_index_to<W: Write>(index: &ReferenceIndex, out: &mut W) -> io::Result<()> {
    let s = index.scales();
    writeln!(out, "{INDEX_MAGIC}")?;
    writeln!(out, "synonym_max={}", s.synonym_max)?;
    writeln!(out, "antonym_max={}", s.antonym_max)?;
    writeln!(out, "semantic_max={}", s.semantic_max)?;
    writeln!(out, "word_order_reference={}", s.word_order_reference)?;
    writeln!(out, "co_occurrence_reference={}", s.co_occurrence_reference)?;
    writeln!(out, "entries={}", index.len())?;
    writeln!(out)?;
    for entry in index.entries() {
        write_str(out, entry.root)?;
        out.write_all(&[entry.dimension.code()])?;
        write_str(out, &entry.term.term)?;
        out.write_all(&entry.term.raw_score.to_le_bytes())?;
        write_opt(out, entry.term.tag.as_deref())?;
        write_opt(out, entry.term.example.as_deref())?;
    }
    Ok(())
}

fn write_str<W: Write>(out: &mut W, s: &str) -> io::Result<()> {
    let len = u32::try_from(s.len()).map_err(|_| io::Error::other("string longer than 4 GiB"))?;
    out.write_all(&len.to_le_bytes())?;
    out.write_all(s.as_bytes())
}

fn write_opt<W: Write>(out: &mut W, s: Option<&str>) -> io::Result<()> {
    match s {
        Some(s) => {
            out.write_all(&[1])?;
            write_str(out, s)
        }
        None => out.write_all(&[0]),
    }
}

/// Writes the index to `path` through a temporary file and a rename.
pub fn write_index(index: &ReferenceIndex, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let write = || -> io::Result<()> {
        let mut out = BufWriter::new(File::create(&tmp)?);
        write_index_to(index, &mut out)?;
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn read_index(path: &Path) -> Result<ReferenceIndex> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_index_from(&mut BufReader::new(file), path)
}

/// Reads an index; `path` is only used in error messages.
pub fn read_index_from<R: Read>(input: &mut R, path: &Path) -> Result<ReferenceIndex> {
    let corrupt = |message: String| Error::Index {
        path: path.to_owned(),
        message,
    };
    let mut reader = Reader { input, path };

    let mut header = Vec::new();
    loop {
        let line = reader.line()?;
        if line.is_empty() {
            break;
        }
        header.push(line);
    }
    if header.first().map(String::as_str) != Some(INDEX_MAGIC) {
        return Err(corrupt("missing `mrm-index 1` header".into()));
    }

    let mut scales = ScoreScaleConfig::default();
    let mut count: Option<usize> = None;
    for line in &header[1..] {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| corrupt(format!("bad header line `{line}`")))?;
        let number = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| corrupt(format!("bad number in header line `{line}`")))
        };
        match key {
            "synonym_max" => scales.synonym_max = number()?,
            "antonym_max" => scales.antonym_max = number()?,
            "semantic_max" => scales.semantic_max = number()?,
            "word_order_reference" => scales.word_order_reference = number()?,
            "co_occurrence_reference" => scales.co_occurrence_reference = number()?,
            "entries" => {
                count = Some(
                    value
                        .parse()
                        .map_err(|_| corrupt(format!("bad entry count `{value}`")))?,
                )
            }
            other => return Err(corrupt(format!("unknown header key `{other}`"))),
        }
    }
    let count = count.ok_or_else(|| corrupt("header has no entry count".into()))?;

    let mut entries = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let root = reader.string()?;
        let code = reader.byte()?;
        let dimension = Dimension::from_code(code).ok_or_else(|| corrupt(format!("unknown dimension code {code}")))?;
        let term = reader.string()?;
        let raw_score = f64::from_le_bytes(reader.array()?);
        let mut entry = ReferenceEntry::new(root, term, dimension, raw_score);
        entry.tag = reader.optional()?;
        entry.example = reader.optional()?;
        entries.push(entry);
    }
    let mut trailing = [0u8; 1];
    if reader.input.read(&mut trailing).map_err(|e| Error::io(path, e))? != 0 {
        return Err(corrupt("trailing bytes after the last entry".into()));
    }

    let index = ReferenceIndex::assemble(entries, scales)?;
    if index.len() != count {
        return Err(corrupt(format!(
            "{count} entries declared but {} distinct entries stored",
            index.len()
        )));
    }
    Ok(index)
}

struct Reader<'a, R> {
    input: &'a mut R,
    path: &'a Path,
}

impl<R: Read> Reader<'_, R> {
    fn fail(&self, e: io::Error) -> Error {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            Error::Index {
                path: self.path.to_owned(),
                message: "truncated file".into(),
            }
        } else {
            Error::io(self.path, e)
        }
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.input.read_exact(&mut buf).map_err(|e| self.fail(e))?;
        Ok(buf)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.array::<1>()?[0])
    }

    fn line(&mut self) -> Result<String> {
        let mut bytes = Vec::new();
        loop {
            match self.byte()? {
                b'\n' => break,
                b => bytes.push(b),
            }
            if bytes.len() > 4096 {
                return Err(Error::Index {
                    path: self.path.to_owned(),
                    message: "header line too long".into(),
                });
            }
        }
        self.utf8(bytes)
    }

    fn string(&mut self) -> Result<String> {
        let len = u32::from_le_bytes(self.array()?) as usize;
        let mut bytes = vec![0u8; len];
        self.input.read_exact(&mut bytes).map_err(|e| self.fail(e))?;
        self.utf8(bytes)
    }

    fn optional(&mut self) -> Result<Option<String>> {
        match self.byte()? {
            0 => Ok(None),
            1 => self.string().map(Some),
            flag => Err(Error::Index {
                path: self.path.to_owned(),
                message: format!("bad presence flag {flag}"),
            }),
        }
    }

    fn utf8(&self, bytes: Vec<u8>) -> Result<String> {
        String::from_utf8(bytes).map_err(|_| Error::Index {
            path: self.path.to_owned(),
            message: "string is not UTF-8".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmodel::build_index;

    fn sample() -> ReferenceIndex {
        let mut wo = ReferenceEntry::new("as well", "as well", Dimension::WordOrder, 5754.0);
        wo.tag = Some("AVP".into());
        wo.example = Some("Can I just say something else as well?".into());
        build_index(
            vec![
                ReferenceEntry::new("happy", "cheerful", Dimension::Synonym, 9.55),
                ReferenceEntry::new("happy", "mad", Dimension::Antonym, 0.95),
                ReferenceEntry::new("you know", "you know", Dimension::WordOrder, 27648.0),
                wo,
            ],
            &ScoreScaleConfig::default(),
        )
        .unwrap()
    }

    fn bytes(index: &ReferenceIndex) -> Vec<u8> {
        let mut out = Vec::new();
        write_index_to(index, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip() {
        let index = sample();
        let encoded = bytes(&index);
        let decoded = read_index_from(&mut encoded.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(decoded, index);
        assert_eq!(bytes(&decoded), encoded);
    }

    #[test]
    fn header_is_text() {
        let encoded = bytes(&sample());
        let text = String::from_utf8_lossy(&encoded);
        assert!(text
            .starts_with("mrm-index 1\nsynonym_max=10\nantonym_max=10\nsemantic_max=5\nword_order_reference=27648\n"));
        assert!(text.contains("entries=4\n\n"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.idx");
        write_index(&sample(), &path).unwrap();
        assert_eq!(read_index(&path).unwrap(), sample());
        assert!(!path.with_extension("tmp").exists());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let encoded = bytes(&sample());
        let cut = &encoded[..encoded.len() - 3];
        let err = read_index_from(&mut &cut[..], Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::Index { .. }), "{err:?}");
    }

    #[test]
    fn wrong_magic_is_rejected() {
        let err = read_index_from(&mut &b"not an index\n\n"[..], Path::new("mem")).unwrap_err();
        assert!(err.is_parse_error());
    }
}
