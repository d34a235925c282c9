//! Reading sample sets, reports and baselines from disk; input digests.

use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use stylodiv::corpus::{self, FeatureRecord, InputFormat, RawDocument, FEATURES_SCHEMA};
use stylodiv::divergence::{InputDigest, REPORT_SCHEMA};
use stylodiv::{DivergenceReport, TAXONOMY_VERSION};

/// A parsed sample set: one feature record per document.
pub struct SampleSet {
    pub label: String,
    pub records: Vec<FeatureRecord>,
}

pub fn label_of(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    for ext in [".features.jsonl", ".jsonl", ".txt", ".json"] {
        if let Some(stem) = name.strip_suffix(ext) {
            if !stem.is_empty() {
                return stem.to_string();
            }
        }
    }
    name
}

/// Directories always read as one-file-per-document.
pub fn effective_format(path: &Path, format: &InputFormat) -> InputFormat {
    if path.is_dir() {
        InputFormat::TxtDir
    } else {
        format.clone()
    }
}

fn first_line(path: &Path) -> Result<Option<String>> {
    let file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    for line in BufReader::new(file).lines() {
        let line = line.with_context(|| format!("cannot read {}", path.display()))?;
        if !line.trim().is_empty() {
            return Ok(Some(line));
        }
    }
    Ok(None)
}

fn schema_of(line: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    v.get("schema")?.as_str().map(String::from)
}

/// True when `path` is a features file written by `extract`.
pub fn is_features_file(path: &Path) -> Result<bool> {
    if path.is_dir() {
        return Ok(false);
    }
    Ok(first_line(path)?.and_then(|l| schema_of(&l)).as_deref() == Some(FEATURES_SCHEMA))
}

/// Every document of a raw input, in input order.
pub fn read_documents(path: &Path, format: &InputFormat) -> Result<(Vec<RawDocument>, u64)> {
    let mut stream = corpus::ingest(path, &effective_format(path, format))?;
    let docs = (&mut stream).collect::<Result<Vec<_>, _>>()?;
    if docs.is_empty() {
        bail!(corpus::CorpusError::NoDocuments(path.display().to_string()));
    }
    Ok((docs, stream.skipped()))
}

/// Raw text or a features file; both yield per-document records.
pub fn read_samples(path: &Path, format: &InputFormat, workers: usize) -> Result<SampleSet> {
    if is_features_file(path)? {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let (header, records) = corpus::features_from_str(&text)?;
        return Ok(SampleSet {
            label: header.label,
            records,
        });
    }
    let (docs, _) = read_documents(path, format)?;
    Ok(SampleSet {
        label: label_of(path),
        records: corpus::extract_stream(docs.into_iter().map(Ok), workers)?,
    })
}

pub fn load_report(path: &Path) -> Result<DivergenceReport> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    report_from_str(&text).with_context(|| format!("in {}", path.display()))
}

pub fn report_from_str(text: &str) -> Result<DivergenceReport> {
    let value: serde_json::Value = serde_json::from_str(text).context("malformed report")?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or("");
    if schema != REPORT_SCHEMA {
        bail!("unsupported schema `{schema}` (expected `{REPORT_SCHEMA}`)");
    }
    let report: DivergenceReport = serde_json::from_value(value).context("malformed report")?;
    if let Some(p) = &report.provenance {
        if p.taxonomy_version != TAXONOMY_VERSION {
            bail!(
                "taxonomy version mismatch: file uses `{}` but this build uses `{TAXONOMY_VERSION}`",
                p.taxonomy_version
            );
        }
    }
    Ok(report)
}

pub fn is_report(path: &Path) -> bool {
    fs::read_to_string(path)
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .is_some_and(|v| v.get("schema").and_then(|s| s.as_str()) == Some(REPORT_SCHEMA))
}

/// Expands directories into the divergence reports they contain, sorted
/// by name. Other JSON files in a directory are ignored.
pub fn expand_reports(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("cannot read {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|e| e == "json") && is_report(f))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn hash_file(path: &Path, hasher: &mut Sha256) -> Result<()> {
    let mut file = fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).with_context(|| format!("cannot read {}", path.display()))?;
        if n == 0 {
            return Ok(());
        }
        hasher.update(&buf[..n]);
    }
}

/// SHA-256 of a file; for a directory, of each regular file's name and
/// digest in name order.
pub fn digest(path: &Path) -> Result<InputDigest> {
    let sha = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .with_context(|| format!("cannot read {}", path.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|f| f.is_file())
            .collect();
        files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
        let mut outer = Sha256::new();
        for f in files {
            let mut inner = Sha256::new();
            hash_file(&f, &mut inner)?;
            outer.update(f.file_name().expect("file has a name").as_encoded_bytes());
            outer.update([0]);
            outer.update(inner.finalize());
        }
        outer.finalize()
    } else {
        let mut h = Sha256::new();
        hash_file(path, &mut h)?;
        h.finalize()
    };
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(sha),
    })
}

pub fn digests(paths: &[&Path]) -> Result<Vec<InputDigest>> {
    paths.iter().map(|p| digest(p)).collect()
}
