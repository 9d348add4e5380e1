//! Readers for tabular, semi-structured and plain-text inputs, and the fan-in
//! step that turns their output into one [`UnifiedDataset`].
//!
//! Every reader is a pure function of one file. All values are kept as text;
//! no column typing happens here.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::tsv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SourceFormat {
    /// Comma-separated text with a header row.
    Tabular,
    /// JSON: a single object or an array of objects.
    SemiStructured,
    /// UTF-8 plain text.
    Unstructured,
}

impl SourceFormat {
    pub const ALL: [SourceFormat; 3] = [
        SourceFormat::Tabular,
        SourceFormat::SemiStructured,
        SourceFormat::Unstructured,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceFormat::Tabular => "tabular",
            SourceFormat::SemiStructured => "semistructured",
            SourceFormat::Unstructured => "unstructured",
        }
    }

    pub fn from_extension(path: &Path) -> Option<SourceFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "csv" => Some(SourceFormat::Tabular),
            "json" => Some(SourceFormat::SemiStructured),
            "txt" | "text" => Some(SourceFormat::Unstructured),
            _ => None,
        }
    }

    /// Picks the declared format when there is one, otherwise infers it from
    /// the extension. A file with neither is a configuration error.
    pub fn resolve(path: &Path, declared: Option<SourceFormat>) -> Result<SourceFormat> {
        match declared {
            Some(format) => Ok(format),
            None => SourceFormat::from_extension(path).ok_or_else(|| {
                Error::Config(format!(
                    "cannot infer input format of {}; declare one of tabular, semistructured, unstructured",
                    path.display()
                ))
            }),
        }
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tabular" | "csv" => Ok(SourceFormat::Tabular),
            "semistructured" | "semi-structured" | "json" => Ok(SourceFormat::SemiStructured),
            "unstructured" | "text" | "txt" => Ok(SourceFormat::Unstructured),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

/// Unit of record for plain-text inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Segmentation {
    #[default]
    Line,
    /// Blank-line delimited paragraphs.
    Paragraph,
}

impl FromStr for Segmentation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Segmentation::Line),
            "paragraph" => Ok(Segmentation::Paragraph),
            other => Err(Error::Config(format!("unknown segmentation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestConfig {
    /// Joins nested JSON keys into one field name.
    pub flatten_separator: String,
    /// Joins the elements of a JSON array of scalars into one value.
    pub array_separator: String,
    pub segmentation: Segmentation,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            flatten_separator: ".".to_owned(),
            array_separator: "; ".to_owned(),
            segmentation: Segmentation::Line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub format: SourceFormat,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub record_id: usize,
    pub fields: Vec<(String, String)>,
    pub origin: Origin,
}

impl Record {
    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub path: PathBuf,
    pub format: SourceFormat,
    pub record_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnifiedDataset {
    pub records: Vec<Record>,
    pub provenance: Vec<Provenance>,
}

impl UnifiedDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes `record_id<TAB>field_name<TAB>value`, one line per field.
    pub fn write_tsv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for record in &self.records {
            for (name, value) in &record.fields {
                writeln!(
                    out,
                    "{}\t{}\t{}",
                    record.record_id,
                    tsv::escape(name),
                    tsv::escape(value)
                )?;
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is UTF-8")
    }
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_owned(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    if text.starts_with('\u{feff}') {
        text.drain(..'\u{feff}'.len_utf8());
    }
    Ok(text)
}

fn origin(path: &Path, format: SourceFormat) -> Origin {
    Origin {
        format,
        path: path.to_owned(),
    }
}

/// Reads comma-separated text whose first row names the fields.
pub fn read_tabular(path: &Path, _config: &IngestConfig) -> Result<Vec<Record>> {
    let text = read_utf8(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_error(path, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != header.len() {
            return Err(Error::format(
                path,
                line,
                format!("expected {} cells, found {}", header.len(), row.len()),
            ));
        }
        records.push(Record {
            record_id: records.len(),
            fields: header.iter().cloned().zip(row.iter().map(str::to_owned)).collect(),
            origin: origin(path, SourceFormat::Tabular),
        });
    }
    Ok(records)
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    Error::format(path, line, err.to_string())
}

/// Reads a JSON object, or an array of objects, one record per object.
///
/// Nested objects are flattened into dotted field names and arrays of
/// scalars are joined into a single value. Arrays that contain objects are
/// flattened with the element index as a path segment.
pub fn read_semistructured(path: &Path, config: &IngestConfig) -> Result<Vec<Record>> {
    let text = read_utf8(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Syntax {
        path: path.to_owned(),
        offset: byte_offset(&text, e.line(), e.column()),
        message: e.to_string(),
    })?;

    let objects = match value {
        Value::Object(map) => vec![map],
        Value::Array(items) => {
            let mut objects = Vec::with_capacity(items.len());
            for (i, item) in items.into_iter().enumerate() {
                match item {
                    Value::Object(map) => objects.push(map),
                    other => {
                        return Err(Error::Syntax {
                            path: path.to_owned(),
                            offset: 0,
                            message: format!("array element {i} is {}, expected an object", kind_of(&other)),
                        })
                    }
                }
            }
            objects
        }
        other => {
            return Err(Error::Syntax {
                path: path.to_owned(),
                offset: 0,
                message: format!("top-level value is {}, expected an object or array", kind_of(&other)),
            })
        }
    };

    Ok(objects
        .into_iter()
        .enumerate()
        .map(|(i, map)| {
            let mut fields = Vec::new();
            for (key, value) in map {
                flatten(&key, value, config, &mut fields);
            }
            Record {
                record_id: i,
                fields,
                origin: origin(path, SourceFormat::SemiStructured),
            }
        })
        .collect())
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn scalar_text(value: &Value) -> Option<String> {
    match value {
        Value::Null => Some(String::new()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => None,
    }
}

fn flatten(prefix: &str, value: Value, config: &IngestConfig, out: &mut Vec<(String, String)>) {
    let join = |key: &str| format!("{prefix}{}{key}", config.flatten_separator);
    match value {
        Value::Object(map) => {
            for (key, child) in map {
                flatten(&join(&key), child, config, out);
            }
        }
        Value::Array(items) => {
            let scalars: Option<Vec<String>> = items.iter().map(scalar_text).collect();
            match scalars {
                Some(parts) => out.push((prefix.to_owned(), parts.join(&config.array_separator))),
                None => {
                    for (i, child) in items.into_iter().enumerate() {
                        flatten(&join(&i.to_string()), child, config, out);
                    }
                }
            }
        }
        scalar => out.push((prefix.to_owned(), scalar_text(&scalar).expect("non-container value"))),
    }
}

// serde_json reports 1-based line and column; column counts bytes.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Reads plain text, one record per line or per paragraph, each with a
/// single field named `text`. Blank units are skipped.
pub fn read_unstructured(path: &Path, config: &IngestConfig) -> Result<Vec<Record>> {
    let text = read_utf8(path)?;
    let units: Vec<String> = match config.segmentation {
        Segmentation::Line => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_owned)
            .collect(),
        Segmentation::Paragraph => {
            let mut units = Vec::new();
            let mut current: Vec<&str> = Vec::new();
            for line in text.lines() {
                if line.trim().is_empty() {
                    if !current.is_empty() {
                        units.push(current.join("\n"));
                        current.clear();
                    }
                } else {
                    current.push(line);
                }
            }
            if !current.is_empty() {
                units.push(current.join("\n"));
            }
            units
        }
    };
    Ok(units
        .into_iter()
        .enumerate()
        .map(|(i, unit)| Record {
            record_id: i,
            fields: vec![("text".to_owned(), unit)],
            origin: origin(path, SourceFormat::Unstructured),
        })
        .collect())
}

pub fn read(path: &Path, format: SourceFormat, config: &IngestConfig) -> Result<Vec<Record>> {
    match format {
        SourceFormat::Tabular => read_tabular(path, config),
        SourceFormat::SemiStructured => read_semistructured(path, config),
        SourceFormat::Unstructured => read_unstructured(path, config),
    }
}

/// Concatenates per-file record lists in argument order and reassigns
/// `record_id` densely from zero.
pub fn unify(parts: Vec<(Vec<Record>, Origin)>) -> UnifiedDataset {
    let mut dataset = UnifiedDataset::default();
    for (records, origin) in parts {
        dataset.provenance.push(Provenance {
            path: origin.path,
            format: origin.format,
            record_count: records.len(),
        });
        for mut record in records {
            record.record_id = dataset.records.len();
            dataset.records.push(record);
        }
    }
    dataset
}

/// Reads every input in order and unifies them.
pub fn ingest(inputs: &[(PathBuf, SourceFormat)], config: &IngestConfig) -> Result<UnifiedDataset> {
    let mut parts = Vec::with_capacity(inputs.len());
    for (path, format) in inputs {
        let records = read(path, *format, config)?;
        parts.push((records, origin(path, *format)));
    }
    Ok(unify(parts))
}
