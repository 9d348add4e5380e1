use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use mrm_core::eval::{comparison_json, run_experiment, write_comparison_tsv, ExperimentConfig};
use mrm_core::preprocess::write_token_dump;
use mrm_core::{
    ingest, load_model_dir, match_dataset, read_index, write_index, Dimension, IndexStats, ReferenceIndex,
    SourceFormat, UnifiedDataset,
};

use crate::config::RunConfig;
use crate::failure::Failure;

/// Writes `bytes` next to `path` under a temporary name, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let name = path
        .file_name()
        .ok_or_else(|| Failure::usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| -> io::Result<()> {
        let mut file = File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::io(path, e)
    })
}

fn require_file(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::missing(format!("{what} not found: {}", path.display())))
    }
}

fn require_dir(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::missing(format!("{what} not found: {}", path.display())))
    }
}

fn output_dir(config: &RunConfig) -> Result<PathBuf, Failure> {
    let out = config.out.clone().ok_or_else(|| Failure::usage("--out is required"))?;
    fs::create_dir_all(&out).map_err(|e| Failure::io(&out, e))?;
    Ok(out)
}

/// Checks every input path and settles its format before any work starts.
fn resolve_inputs(config: &RunConfig) -> Result<Vec<(PathBuf, SourceFormat)>, Failure> {
    if config.inputs.is_empty() {
        return Err(Failure::missing("no input given; pass --input <path>[:<format>]"));
    }
    let mut resolved = Vec::new();
    for (path, declared) in &config.inputs {
        require_file(path, "input")?;
        resolved.push((path.clone(), SourceFormat::resolve(path, *declared)?));
    }
    Ok(resolved)
}

/// Checks the index source; `--index` wins over `--model-dir`.
fn check_index_source(config: &RunConfig) -> Result<(), Failure> {
    match (&config.index, &config.model_dir) {
        (Some(index), _) => require_file(index, "index"),
        (None, Some(dir)) => require_dir(dir, "model directory"),
        (None, None) => Err(Failure::missing("no index; pass --index or --model-dir")),
    }
}

fn load_index(config: &RunConfig) -> Result<ReferenceIndex, Failure> {
    match (&config.index, &config.model_dir) {
        (Some(index), _) => Ok(read_index(index)?),
        (None, Some(dir)) => Ok(load_model_dir(dir, &config.parse, &config.scales)?),
        (None, None) => Err(Failure::missing("no index; pass --index or --model-dir")),
    }
}

pub fn format_stats(stats: &IndexStats) -> String {
    let mut text = format!(
        "total_entries: {}\ndistinct_roots: {}\ndistinct_words: {}\nword_tokens: {}\n",
        stats.total_entries, stats.distinct_roots, stats.distinct_words, stats.word_tokens
    );
    for dimension in Dimension::ALL {
        let count = stats.entries_per_dimension.get(&dimension).copied().unwrap_or(0);
        text.push_str(&format!("{dimension:?}:{count}\n"));
    }
    text
}

pub fn cmd_build_index(config: &RunConfig) -> Result<(), Failure> {
    config.validate()?;
    let dir = config
        .model_dir
        .as_ref()
        .ok_or_else(|| Failure::missing("--model-dir is required"))?;
    require_dir(dir, "model directory")?;
    let out = config
        .out
        .as_ref()
        .ok_or_else(|| Failure::usage("--out is required (path of the index file)"))?;
    let index = load_model_dir(dir, &config.parse, &config.scales)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
    }
    write_index(&index, out)?;
    print!("{}", format_stats(index.stats()));
    Ok(())
}

pub fn cmd_stats(config: &RunConfig) -> Result<(), Failure> {
    config.validate()?;
    check_index_source(config)?;
    print!("{}", format_stats(load_index(config)?.stats()));
    Ok(())
}

pub fn cmd_match(config: &RunConfig) -> Result<(), Failure> {
    config.validate()?;
    check_index_source(config)?;
    let inputs = resolve_inputs(config)?;
    let out = output_dir(config)?;

    let index = load_index(config)?;
    let dataset = ingest(&inputs, &config.ingest)?;
    let matches = match_dataset(&dataset, &index, &config.preprocess, &config.matching);

    let mut dump = Vec::new();
    matches.write_dump(&mut dump).map_err(|e| Failure::io(&out, e))?;
    let mut tokens = Vec::new();
    let roots: Vec<_> = matches.fields.iter().flat_map(|f| f.tokens.iter().cloned()).collect();
    write_token_dump(&roots, &mut tokens).map_err(|e| Failure::io(&out, e))?;
    let harmonized: UnifiedDataset = matches.harmonize(&dataset);
    let mut report = Vec::new();
    matches
        .report(&dataset)
        .write_to(&mut report)
        .map_err(|e| Failure::io(&out, e))?;

    write_atomic(&out.join("matches.tsv"), &dump)?;
    write_atomic(&out.join("tokens.tsv"), &tokens)?;
    write_atomic(&out.join("harmonized.tsv"), harmonized.to_tsv().as_bytes())?;
    write_atomic(&out.join("report.txt"), &report)?;
    print!("{}", String::from_utf8_lossy(&report));
    Ok(())
}

fn read_terms(path: &Path) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

/// Dataset names are file stems, suffixed with `-2`, `-3`, ... on repeats.
fn dataset_names(inputs: &[(PathBuf, SourceFormat)]) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    inputs
        .iter()
        .map(|(path, _)| {
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_owned());
            let n = seen.entry(stem.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                stem
            } else {
                format!("{stem}-{n}")
            }
        })
        .collect()
}

pub fn cmd_evaluate(config: &RunConfig) -> Result<(), Failure> {
    config.validate()?;
    check_index_source(config)?;
    let inputs = resolve_inputs(config)?;
    let terms_path = config
        .srm_terms
        .as_ref()
        .ok_or_else(|| Failure::missing("--srm-terms is required"))?;
    require_file(terms_path, "SRM term list")?;
    let out = output_dir(config)?;

    let index = load_index(config)?;
    let terms = read_terms(terms_path)?;
    let experiment = ExperimentConfig {
        batches: config.batches,
        counting: config.counting,
        preprocess: config.preprocess.clone(),
        matching: config.matching.clone(),
    };
    let mut rows = Vec::new();
    for (input, name) in inputs.iter().zip(dataset_names(&inputs)) {
        let dataset = ingest(std::slice::from_ref(input), &config.ingest)?;
        let dataset_rows = run_experiment(&name, &dataset, &terms, &index, &experiment)
            .map_err(|e| Failure::usage(format!("{}: {e}", input.0.display())))?;
        rows.extend(dataset_rows);
    }

    let mut table = Vec::new();
    write_comparison_tsv(&rows, &mut table).map_err(|e| Failure::io(&out, e))?;
    let mut json = serde_json::to_string_pretty(&comparison_json(&rows)).expect("JSON values always serialize");
    json.push('\n');
    write_atomic(&out.join("comparison.tsv"), &table)?;
    write_atomic(&out.join("comparison.json"), json.as_bytes())?;
    print!("{}", String::from_utf8_lossy(&table));
    Ok(())
}
