//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use mrm_core::eval::{TermCounting, DEFAULT_BATCHES};
use mrm_core::refmodel::ParseOptions;
use mrm_core::{Dimension, IngestConfig, MatchConfig, PreprocessConfig, ScoreScaleConfig, SourceFormat};

use crate::failure::Failure;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<(PathBuf, Option<SourceFormat>)>,
    pub model_dir: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub srm_terms: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub ingest: IngestConfig,
    pub preprocess: PreprocessConfig,
    pub matching: MatchConfig,
    pub scales: ScoreScaleConfig,
    pub parse: ParseOptions,
    pub batches: usize,
    pub counting: TermCounting,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            model_dir: None,
            index: None,
            srm_terms: None,
            out: None,
            ingest: IngestConfig::default(),
            preprocess: PreprocessConfig::default(),
            matching: MatchConfig::default(),
            scales: ScoreScaleConfig::default(),
            parse: ParseOptions::default(),
            batches: DEFAULT_BATCHES,
            counting: TermCounting::default(),
        }
    }
}

/// Splits `path[:format]`. The suffix after the last `:` is taken as a
/// format only when it names one, so paths containing `:` still work.
pub fn parse_input_spec(spec: &str) -> (PathBuf, Option<SourceFormat>) {
    if let Some((path, suffix)) = spec.rsplit_once(':') {
        if let Ok(format) = suffix.parse::<SourceFormat>() {
            if !path.is_empty() {
                return (PathBuf::from(path), Some(format));
            }
        }
    }
    (PathBuf::from(spec), None)
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{value}` is not a boolean")),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("`{value}` is not a valid number"))
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl RunConfig {
    /// Applies one setting. Relative paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), String> {
        let path = || base.join(value);
        match key {
            "model_dir" => self.model_dir = Some(path()),
            "index" => self.index = Some(path()),
            "srm_terms" => self.srm_terms = Some(path()),
            "out" => self.out = Some(path()),
            "input" => {
                let (p, format) = parse_input_spec(value);
                self.inputs.push((base.join(p), format));
            }
            "srm_threshold" => self.matching.srm_threshold = parse_num(value)?,
            "mrm_threshold" => self.matching.mrm_threshold = parse_num(value)?,
            "context_precedence" => self.matching.context_precedence = parse_bool(value)?,
            "antonym_context" => self.matching.antonym_context = parse_bool(value)?,
            "fuzzy_lexical" => self.matching.fuzzy_lexical = parse_bool(value)?,
            "ngram_max" => self.matching.ngram_max = parse_num(value)?,
            "dimension_priority" => {
                self.matching.dimension_priority = list(value)
                    .map(|d| d.parse::<Dimension>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?
            }
            "batches" => self.batches = parse_num(value)?,
            "term_counting" => self.counting = value.parse().map_err(|e: mrm_core::Error| e.to_string())?,
            "stopwords" => self.preprocess.stopwords = list(value).map(str::to_lowercase).collect(),
            "split_multiword" => self.preprocess.split_multiword = parse_bool(value)?,
            "stem_exceptions" => {
                for pair in list(value) {
                    let (word, root) = pair
                        .split_once(':')
                        .ok_or_else(|| format!("stem exception `{pair}` must look like word:root"))?;
                    self.preprocess
                        .stem_exceptions
                        .insert(word.trim().to_lowercase(), root.trim().to_lowercase());
                }
            }
            "segmentation" => self.ingest.segmentation = value.parse().map_err(|e: mrm_core::Error| e.to_string())?,
            "flatten_separator" => self.ingest.flatten_separator = value.to_owned(),
            "array_separator" => self.ingest.array_separator = value.to_owned(),
            "synonym_max" => self.scales.synonym_max = parse_num(value)?,
            "antonym_max" => self.scales.antonym_max = parse_num(value)?,
            "semantic_max" => self.scales.semantic_max = parse_num(value)?,
            "pair_expansion" => self.parse.pair_expansion = parse_bool(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Reads a config file: one `key = value` per line, `#` comments, blank
    /// lines ignored. Values may be wrapped in double quotes to keep
    /// surrounding spaces.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |message: String| Failure::parse(format!("{}:{}: {message}", path.display(), i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at("expected `key = value`".into()))?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .unwrap_or(value);
            self.set(key.trim(), value, base).map_err(at)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.matching.validate()?;
        self.scales.validate()?;
        if self.batches == 0 {
            return Err(Failure::usage("batches must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_specs() {
        assert_eq!(parse_input_spec("a.csv"), (PathBuf::from("a.csv"), None));
        assert_eq!(
            parse_input_spec("data/a.log:unstructured"),
            (PathBuf::from("data/a.log"), Some(SourceFormat::Unstructured))
        );
        assert_eq!(parse_input_spec("c:/x/a.json"), (PathBuf::from("c:/x/a.json"), None));
        assert_eq!(
            parse_input_spec("a:b:json"),
            (PathBuf::from("a:b"), Some(SourceFormat::SemiStructured))
        );
    }

    #[test]
    fn config_file_values_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(
            &path,
            "# comment\nmodel_dir = model\nmrm_threshold = 0.6\ncontext_precedence = no\n\
             input = a.txt:text\nstopwords = the, a\narray_separator = \" | \"\n",
        )
        .unwrap();
        let mut config = RunConfig::default();
        config.apply_file(&path).unwrap();
        assert_eq!(config.model_dir, Some(dir.path().join("model")));
        assert_eq!(config.matching.mrm_threshold, 0.6);
        assert!(!config.matching.context_precedence);
        assert_eq!(
            config.inputs,
            [(dir.path().join("a.txt"), Some(SourceFormat::Unstructured))]
        );
        assert_eq!(config.preprocess.stopwords.len(), 2);
        assert_eq!(config.ingest.array_separator, " | ");

        fs::write(&path, "batches = 5\nbogus = 1\n").unwrap();
        let err = RunConfig::default().apply_file(&path).unwrap_err();
        assert_eq!(err.code, 3);
        assert!(err.message.contains("run.conf:2"), "{}", err.message);
    }
}
