//! Corpus ingestion and baseline statistics.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{self, FeatureCounts, FeatureId, PerFeature};
use crate::parallel;
use crate::stats;
use crate::textmodel::Document;
use crate::TAXONOMY_VERSION;

pub const BASELINE_SCHEMA: &str = "stylodiv-baseline/1";

/// Baseline build warns when a feature with at least this mean (per 1000
/// tokens) has a standard error above [`SE_LIMIT`].
pub const SE_GATE_MIN_MU: f64 = 0.1;
pub const SE_LIMIT: f64 = 0.032;

/// Pass threshold for baseline test-retest correlation.
pub const RETEST_MIN_R: f64 = 0.95;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("no documents in {0}")]
    NoDocuments(String),
    #[error("taxonomy version mismatch: file uses `{found}` but this build uses `{expected}`")]
    TaxonomyMismatch { found: String, expected: String },
    #[error("incomplete baseline: {0}")]
    IncompleteBaseline(String),
    #[error("unsupported schema `{found}` (expected `{expected}`)")]
    Schema { found: String, expected: String },
    #[error("malformed file: {0}")]
    Malformed(String),
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A document as read from disk, before decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

impl RawDocument {
    pub fn decompose(&self) -> Document {
        Document::new(self.id.clone(), &self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputFormat {
    /// One JSON object per line with a required string `text` and optional `id`.
    Jsonl,
    /// One document per regular file, in lexicographic filename order.
    TxtDir,
    /// Documents separated by lines equal to the delimiter.
    TxtDelim { delimiter: String },
}

pub const DEFAULT_DELIMITER: &str = "<|endoftext|>";

enum Source {
    Lines {
        reader: Box<dyn BufRead>,
        delimiter: Option<String>,
        line_no: u64,
    },
    Dir {
        files: std::vec::IntoIter<PathBuf>,
    },
}

/// Ordered stream of documents. Malformed records are skipped and counted.
pub struct DocumentStream {
    source: Source,
    label: String,
    path: PathBuf,
    ordinal: u64,
    skipped: u64,
    failed: bool,
}

fn source_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Opens `path` for streaming. Unreadable paths fail immediately.
pub fn ingest(path: &Path, format: &InputFormat) -> Result<DocumentStream, CorpusError> {
    let label = source_label(path);
    let source = match format {
        InputFormat::TxtDir => {
            let mut files = Vec::new();
            for entry in fs::read_dir(path).map_err(|e| CorpusError::io(path, e))? {
                let entry = entry.map_err(|e| CorpusError::io(path, e))?;
                if entry.file_type().map_err(|e| CorpusError::io(path, e))?.is_file() {
                    files.push(entry.path());
                }
            }
            files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
            Source::Dir {
                files: files.into_iter(),
            }
        }
        InputFormat::Jsonl | InputFormat::TxtDelim { .. } => {
            let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
            if file.metadata().map_err(|e| CorpusError::io(path, e))?.is_dir() {
                return Err(CorpusError::io(path, io::Error::other("is a directory")));
            }
            return Ok(DocumentStream::from_reader(BufReader::new(file), format, label).with_path(path));
        }
    };
    Ok(DocumentStream {
        source,
        label,
        path: path.to_path_buf(),
        ordinal: 0,
        skipped: 0,
        failed: false,
    })
}

impl DocumentStream {
    /// Streams from any reader. `format` must be line based (not `TxtDir`).
    pub fn from_reader<R: BufRead + 'static>(reader: R, format: &InputFormat, label: impl Into<String>) -> Self {
        let delimiter = match format {
            InputFormat::TxtDelim { delimiter } => Some(delimiter.clone()),
            InputFormat::Jsonl => None,
            InputFormat::TxtDir => panic!("directory format cannot stream from a reader"),
        };
        let label = label.into();
        DocumentStream {
            source: Source::Lines {
                reader: Box::new(reader),
                delimiter,
                line_no: 0,
            },
            path: PathBuf::from(&label),
            label,
            ordinal: 0,
            skipped: 0,
            failed: false,
        }
    }

    fn with_path(mut self, path: &Path) -> Self {
        self.path = path.to_path_buf();
        self
    }

    /// Records skipped so far (malformed JSON, missing `text`, invalid UTF-8).
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn next_id(&mut self) -> String {
        let id = format!("{}#{}", self.label, self.ordinal);
        self.ordinal += 1;
        id
    }

    fn next_jsonl(&mut self) -> Option<Result<RawDocument, CorpusError>> {
        let Source::Lines { reader, line_no, .. } = &mut self.source else {
            unreachable!()
        };
        let mut buf = Vec::new();
        loop {
            buf.clear();
            match reader.read_until(b'\n', &mut buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(CorpusError::io(&self.path, e))),
            }
            *line_no += 1;
            if buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let parsed = serde_json::from_slice::<serde_json::Value>(&buf);
            let record = match parsed {
                Ok(serde_json::Value::Object(map)) => map,
                _ => {
                    self.skipped += 1;
                    continue;
                }
            };
            let Some(text) = record.get("text").and_then(|t| t.as_str()) else {
                self.skipped += 1;
                continue;
            };
            let text = text.to_string();
            let id = match record.get("id") {
                Some(serde_json::Value::String(s)) => {
                    self.ordinal += 1;
                    s.clone()
                }
                Some(serde_json::Value::Number(n)) => {
                    self.ordinal += 1;
                    n.to_string()
                }
                _ => self.next_id(),
            };
            return Some(Ok(RawDocument { id, text }));
        }
    }

    fn next_delimited(&mut self) -> Option<Result<RawDocument, CorpusError>> {
        let Source::Lines {
            reader, delimiter, ..
        } = &mut self.source
        else {
            unreachable!()
        };
        let delimiter = delimiter.as_deref().unwrap_or(DEFAULT_DELIMITER);
        let mut chunk: Vec<u8> = Vec::new();
        let mut line = Vec::new();
        loop {
            line.clear();
            let n = match reader.read_until(b'\n', &mut line) {
                Ok(n) => n,
                Err(e) => return Some(Err(CorpusError::io(&self.path, e))),
            };
            let at_end = n == 0;
            let is_delim = !at_end && {
                let trimmed = line.strip_suffix(b"\n").unwrap_or(&line);
                let trimmed = trimmed.strip_suffix(b"\r").unwrap_or(trimmed);
                trimmed == delimiter.as_bytes()
            };
            if !at_end && !is_delim {
                chunk.extend_from_slice(&line);
                continue;
            }
            if chunk.iter().all(u8::is_ascii_whitespace) {
                if at_end {
                    return None;
                }
                chunk.clear();
                continue;
            }
            match String::from_utf8(std::mem::take(&mut chunk)) {
                Ok(mut text) => {
                    if text.ends_with('\n') {
                        text.pop();
                        if text.ends_with('\r') {
                            text.pop();
                        }
                    }
                    let id = self.next_id();
                    return Some(Ok(RawDocument { id, text }));
                }
                Err(_) => {
                    self.skipped += 1;
                    if at_end {
                        return None;
                    }
                }
            }
        }
    }

    fn next_file(&mut self) -> Option<Result<RawDocument, CorpusError>> {
        let Source::Dir { files } = &mut self.source else {
            unreachable!()
        };
        for path in files.by_ref() {
            let mut bytes = Vec::new();
            if let Err(e) = File::open(&path).and_then(|mut f| f.read_to_end(&mut bytes)) {
                return Some(Err(CorpusError::io(&path, e)));
            }
            match String::from_utf8(bytes) {
                Ok(text) => {
                    self.ordinal += 1;
                    return Some(Ok(RawDocument {
                        id: source_label(&path),
                        text,
                    }));
                }
                Err(_) => self.skipped += 1,
            }
        }
        None
    }
}

impl Iterator for DocumentStream {
    type Item = Result<RawDocument, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let item = match &self.source {
            Source::Dir { .. } => self.next_file(),
            Source::Lines { delimiter: None, .. } => self.next_jsonl(),
            Source::Lines { .. } => self.next_delimited(),
        };
        if matches!(item, Some(Err(_))) {
            self.failed = true;
        }
        item
    }
}

/// Uniform fixed-size sample of a stream of unknown length (Algorithm R).
/// For a fixed seed and input order the retained items are reproducible.
pub struct Reservoir<T> {
    capacity: usize,
    seen: u64,
    items: Vec<T>,
    rng: ChaCha8Rng,
}

impl<T> Reservoir<T> {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "reservoir capacity must be positive");
        Reservoir {
            capacity,
            seen: 0,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn offer(&mut self, item: T) {
        self.seen += 1;
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            let j = self.rng.random_range(0..self.seen);
            if (j as usize) < self.capacity {
                self.items[j as usize] = item;
            }
        }
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn into_items(self) -> Vec<T> {
        self.items
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    /// Unweighted mean of per-document frequencies.
    pub mu: f64,
    /// Token-weighted corpus frequency (pooled counts over pooled tokens).
    pub mu_pooled: f64,
    /// Population standard deviation of per-document frequencies.
    pub sigma: f64,
    /// `sigma / mu`, absent when `mu == 0`.
    pub cv: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    pub schema: String,
    pub taxonomy_version: String,
    pub corpus_label: String,
    pub doc_count: u64,
    pub token_count: u64,
    /// Unix seconds.
    pub build_timestamp: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sample_limit: Option<u64>,
    pub features: PerFeature<FeatureStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<crate::divergence::Provenance>,
}

impl BaselineStats {
    pub fn stat(&self, id: FeatureId) -> &FeatureStats {
        &self.features[id]
    }

    pub fn cv_over(&self, threshold: f64) -> usize {
        self.features
            .iter()
            .filter(|(_, s)| s.cv.is_some_and(|cv| cv > threshold))
            .count()
    }
}

/// Per-document summary kept while streaming.
#[derive(Debug, Clone, Copy)]
pub struct DocProfile {
    pub counts: FeatureCounts,
    pub tokens: u64,
}

impl DocProfile {
    pub fn of(doc: &Document) -> Self {
        DocProfile {
            counts: features::count(doc),
            tokens: doc.token_count as u64,
        }
    }

    pub fn frequencies(&self) -> PerFeature<f64> {
        self.counts.map(|_, &c| features::frequency(c, self.tokens))
    }
}

/// Order-sensitive but deterministic accumulator: per-feature sum of
/// frequencies for the mean, Welford updates for the variance, and raw
/// count totals for the pooled frequency.
#[derive(Debug, Clone, Default)]
struct StatsAccumulator {
    docs: u64,
    tokens: u64,
    counts: FeatureCounts,
    sum: PerFeature<f64>,
    welford_mean: PerFeature<f64>,
    welford_m2: PerFeature<f64>,
}

impl StatsAccumulator {
    fn push(&mut self, p: &DocProfile) {
        self.docs += 1;
        self.tokens += p.tokens;
        let n = self.docs as f64;
        for (id, &x) in p.frequencies().iter() {
            self.counts[id] += p.counts[id];
            self.sum[id] += x;
            let delta = x - self.welford_mean[id];
            self.welford_mean[id] += delta / n;
            self.welford_m2[id] += delta * (x - self.welford_mean[id]);
        }
    }

    fn finish(&self) -> PerFeature<FeatureStats> {
        let n = self.docs as f64;
        PerFeature::from_fn(|id| {
            let mu = self.sum[id] / n;
            let sigma = (self.welford_m2[id] / n).max(0.0).sqrt();
            FeatureStats {
                mu,
                mu_pooled: features::frequency(self.counts[id], self.tokens),
                sigma,
                cv: (mu > 0.0).then(|| sigma / mu),
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct BaselineOptions {
    pub label: String,
    pub sample_limit: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub timestamp: u64,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        BaselineOptions {
            label: "corpus".into(),
            sample_limit: None,
            seed: 42,
            workers: 1,
            timestamp: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineBuild {
    pub stats: BaselineStats,
    /// Documents read from the stream (before sampling).
    pub seen: u64,
    /// True when the reservoir actually discarded documents.
    pub sampled: bool,
    pub warnings: Vec<String>,
}

const CHUNK: usize = 2048;

/// Extracts profiles for a stream of documents in parallel chunks, handing
/// them to `sink` in input order.
pub fn profile_stream<I>(docs: I, workers: usize, mut sink: impl FnMut(&RawDocument, DocProfile)) -> Result<u64, CorpusError>
where
    I: IntoIterator<Item = Result<RawDocument, CorpusError>>,
{
    let mut seen = 0u64;
    let mut batch = Vec::with_capacity(CHUNK);
    let mut flush = |batch: &mut Vec<RawDocument>| {
        let profiles = parallel::map_ordered(batch, workers, |d| DocProfile::of(&d.decompose()));
        for (d, p) in batch.iter().zip(profiles) {
            sink(d, p);
        }
        batch.clear();
    };
    for doc in docs {
        batch.push(doc?);
        seen += 1;
        if batch.len() == CHUNK {
            flush(&mut batch);
        }
    }
    flush(&mut batch);
    Ok(seen)
}

/// Builds baseline statistics from a document stream, reservoir sampling
/// down to `sample_limit` documents when the stream is longer.
pub fn build_baseline<I>(docs: I, options: &BaselineOptions) -> Result<BaselineBuild, CorpusError>
where
    I: IntoIterator<Item = Result<RawDocument, CorpusError>>,
{
    let mut acc = StatsAccumulator::default();
    let mut reservoir = options
        .sample_limit
        .map(|k| Reservoir::new(k.max(1) as usize, options.seed));
    let seen = profile_stream(docs, options.workers, |_, p| match reservoir.as_mut() {
        Some(r) => r.offer(p),
        None => acc.push(&p),
    })?;
    if seen == 0 {
        return Err(CorpusError::NoDocuments(options.label.clone()));
    }
    let mut sampled = false;
    if let Some(r) = reservoir {
        sampled = r.seen() > r.capacity as u64;
        for p in r.into_items() {
            acc.push(&p);
        }
    }
    let features = acc.finish();
    let stats = BaselineStats {
        schema: BASELINE_SCHEMA.into(),
        taxonomy_version: TAXONOMY_VERSION.into(),
        corpus_label: options.label.clone(),
        doc_count: acc.docs,
        token_count: acc.tokens,
        build_timestamp: options.timestamp,
        seed: Some(options.seed),
        sample_limit: options.sample_limit,
        features,
        provenance: None,
    };
    let warnings = standard_error_warnings(&stats);
    Ok(BaselineBuild {
        stats,
        seen,
        sampled,
        warnings,
    })
}

/// Features whose mean is large enough to matter but whose standard error
/// exceeds the noise bound.
pub fn standard_error_warnings(stats: &BaselineStats) -> Vec<String> {
    let n = stats.doc_count as f64;
    stats
        .features
        .iter()
        .filter_map(|(id, s)| {
            let se = s.sigma / n.sqrt();
            (s.mu >= SE_GATE_MIN_MU && se > SE_LIMIT).then(|| {
                format!("{id}: standard error {se:.4} per 1000 tokens exceeds {SE_LIMIT} (mu {:.4}, n {})", s.mu, stats.doc_count)
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Correlation undefined because one side has zero variance.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pearson_r: Option<f64>,
    pub verdict: Verdict,
    pub threshold: f64,
    pub cv_over_half_a: usize,
    pub cv_over_half_b: usize,
}

/// Test-retest comparison of two baselines over the per-feature means.
pub fn validate_baseline(a: &BaselineStats, b: &BaselineStats) -> Result<ValidationReport, CorpusError> {
    if a.taxonomy_version != b.taxonomy_version {
        return Err(CorpusError::TaxonomyMismatch {
            found: b.taxonomy_version.clone(),
            expected: a.taxonomy_version.clone(),
        });
    }
    let xs: Vec<f64> = a.features.0.iter().map(|s| s.mu).collect();
    let ys: Vec<f64> = b.features.0.iter().map(|s| s.mu).collect();
    let r = stats::pearson_r(&xs, &ys);
    let verdict = match r {
        None => Verdict::Degenerate,
        Some(r) if r > RETEST_MIN_R => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    Ok(ValidationReport {
        pearson_r: r,
        verdict,
        threshold: RETEST_MIN_R,
        cv_over_half_a: a.cv_over(0.5),
        cv_over_half_b: b.cv_over(0.5),
    })
}

/// Serializes a baseline to its canonical text form.
pub fn baseline_to_string(stats: &BaselineStats) -> String {
    let mut s = serde_json::to_string_pretty(stats).expect("baseline serializes");
    s.push('\n');
    s
}

pub fn save_baseline(path: &Path, stats: &BaselineStats) -> Result<(), CorpusError> {
    fs::write(path, baseline_to_string(stats)).map_err(|e| CorpusError::io(path, e))
}

/// Parses a baseline document, checking schema, taxonomy version and
/// feature completeness with explicit messages.
pub fn baseline_from_str(text: &str) -> Result<BaselineStats, CorpusError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CorpusError::Malformed(e.to_string()))?;
    let field = |name: &str| value.get(name).and_then(|v| v.as_str()).unwrap_or("").to_string();
    let schema = field("schema");
    if schema != BASELINE_SCHEMA {
        return Err(CorpusError::Schema {
            found: schema,
            expected: BASELINE_SCHEMA.into(),
        });
    }
    let version = field("taxonomy_version");
    if version != TAXONOMY_VERSION {
        return Err(CorpusError::TaxonomyMismatch {
            found: version,
            expected: TAXONOMY_VERSION.into(),
        });
    }
    let Some(features) = value.get("features").and_then(|f| f.as_object()) else {
        return Err(CorpusError::IncompleteBaseline("missing `features` section".into()));
    };
    if let Some(missing) = FeatureId::ALL.iter().find(|id| !features.contains_key(id.name())) {
        return Err(CorpusError::IncompleteBaseline(format!("missing feature `{missing}`")));
    }
    let stats: BaselineStats = serde_json::from_value(value).map_err(|e| CorpusError::Malformed(e.to_string()))?;
    if stats.doc_count == 0 {
        return Err(CorpusError::Malformed("doc_count must be positive".into()));
    }
    Ok(stats)
}

pub fn load_baseline(path: &Path) -> Result<BaselineStats, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    baseline_from_str(&text)
}

pub const FEATURES_SCHEMA: &str = "stylodiv-features/1";

/// First line of a features file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesHeader {
    pub schema: String,
    pub taxonomy_version: String,
    pub tool_version: String,
    pub label: String,
    pub doc_count: u64,
    pub token_count: u64,
    pub skipped: u64,
    #[serde(default)]
    pub inputs: Vec<crate::divergence::InputDigest>,
}

/// One document's raw counts and frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub id: String,
    pub tokens: u64,
    pub counts: FeatureCounts,
    pub values: PerFeature<f64>,
}

impl FeatureRecord {
    pub fn new(id: impl Into<String>, profile: &DocProfile) -> Self {
        FeatureRecord {
            id: id.into(),
            tokens: profile.tokens,
            counts: profile.counts,
            values: profile.frequencies(),
        }
    }

    pub fn to_vector(&self) -> features::FeatureVector {
        features::FeatureVector::from_counts(self.counts, self.tokens, 1)
    }
}

impl FeaturesHeader {
    pub fn new(label: impl Into<String>, records: &[FeatureRecord], skipped: u64) -> Self {
        FeaturesHeader {
            schema: FEATURES_SCHEMA.into(),
            taxonomy_version: TAXONOMY_VERSION.into(),
            tool_version: crate::TOOL_VERSION.into(),
            label: label.into(),
            doc_count: records.len() as u64,
            token_count: records.iter().map(|r| r.tokens).sum(),
            skipped,
            inputs: Vec::new(),
        }
    }
}

/// JSON Lines: the header, then one record per document.
pub fn features_to_string(header: &FeaturesHeader, records: &[FeatureRecord]) -> String {
    let mut out = serde_json::to_string(header).expect("header serializes");
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parses a features file. Frequencies are recomputed from the counts.
pub fn features_from_str(text: &str) -> Result<(FeaturesHeader, Vec<FeatureRecord>), CorpusError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines.next().ok_or_else(|| CorpusError::Malformed("empty features file".into()))?;
    let head: serde_json::Value = serde_json::from_str(first).map_err(|e| CorpusError::Malformed(e.to_string()))?;
    let schema = head.get("schema").and_then(|v| v.as_str()).unwrap_or("").to_string();
    if schema != FEATURES_SCHEMA {
        return Err(CorpusError::Schema {
            found: schema,
            expected: FEATURES_SCHEMA.into(),
        });
    }
    let header: FeaturesHeader = serde_json::from_value(head).map_err(|e| CorpusError::Malformed(e.to_string()))?;
    if header.taxonomy_version != TAXONOMY_VERSION {
        return Err(CorpusError::TaxonomyMismatch {
            found: header.taxonomy_version,
            expected: TAXONOMY_VERSION.into(),
        });
    }
    let records = lines
        .enumerate()
        .map(|(i, l)| {
            let mut r: FeatureRecord =
                serde_json::from_str(l).map_err(|e| CorpusError::Malformed(format!("record {}: {e}", i + 1)))?;
            r.values = r.counts.map(|_, &c| features::frequency(c, r.tokens));
            Ok(r)
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    if records.is_empty() {
        return Err(CorpusError::NoDocuments(header.label));
    }
    Ok((header, records))
}

/// Extracts every document of a stream into feature records.
pub fn extract_stream<I>(docs: I, workers: usize) -> Result<Vec<FeatureRecord>, CorpusError>
where
    I: IntoIterator<Item = Result<RawDocument, CorpusError>>,
{
    let mut out = Vec::new();
    profile_stream(docs, workers, |d, p| out.push(FeatureRecord::new(d.id.clone(), &p)))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn raw(texts: &[&str]) -> Vec<Result<RawDocument, CorpusError>> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok(RawDocument {
                    id: format!("d{i}"),
                    text: t.to_string(),
                })
            })
            .collect()
    }

    #[test]
    fn jsonl_skips_malformed() {
        let input = "{\"text\": \"one two\", \"id\": \"a\"}\n{not json\n{\"text\": \"three\"}\n";
        let mut stream = DocumentStream::from_reader(Cursor::new(input), &InputFormat::Jsonl, "s.jsonl");
        let docs: Vec<RawDocument> = stream.by_ref().map(Result::unwrap).collect();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "a");
        assert_eq!(docs[1].id, "s.jsonl#1");
        assert_eq!(stream.skipped(), 1);
    }

    #[test]
    fn jsonl_missing_text_and_bad_utf8_are_skipped() {
        let mut input = b"{\"id\": 3}\n{\"text\": 5}\n".to_vec();
        input.extend_from_slice(b"{\"text\": \"\xff\"}\n{\"text\": \"ok\"}\n");
        let mut stream = DocumentStream::from_reader(Cursor::new(input), &InputFormat::Jsonl, "x");
        let docs: Vec<_> = stream.by_ref().collect();
        assert_eq!(docs.len(), 1);
        assert_eq!(stream.skipped(), 3);
    }

    #[test]
    fn delimited_documents() {
        let fmt = InputFormat::TxtDelim {
            delimiter: "---".into(),
        };
        let input = "first doc\nline two\n---\n\n---\nsecond\r\n---\r\n";
        let docs: Vec<RawDocument> = DocumentStream::from_reader(Cursor::new(input), &fmt, "f")
            .map(Result::unwrap)
            .collect();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].text, "first doc\nline two");
        assert_eq!(docs[1].text, "second");
        assert_eq!(docs[1].id, "f#1");
    }

    #[test]
    fn two_point_baseline() {
        // 5 tokens each; 0 and 2 per 1000 tokens need 0 and 0.01 dashes,
        // so scale tokens instead: 500 tokens with 0 and 1 dash.
        let filler = vec!["w"; 499].join(" ");
        let a = format!("{filler} x");
        let b = format!("{filler} \u{2014}");
        let build = build_baseline(raw(&[&a, &b]), &BaselineOptions::default()).unwrap();
        let s = build.stats.stat(FeatureId::EmDash);
        assert_eq!(s.mu, 1.0);
        assert_eq!(s.sigma, 1.0);
        assert_eq!(s.cv, Some(1.0));
        assert_eq!(s.mu_pooled, 1.0);
        assert_eq!(build.stats.stat(FeatureId::Semicolon).cv, None);
    }

    #[test]
    fn single_document_has_zero_sigma() {
        let build = build_baseline(raw(&["a; b; c \u{2014} (d)"]), &BaselineOptions::default()).unwrap();
        assert!(build.stats.features.0.iter().all(|s| s.sigma == 0.0));
        assert_eq!(build.stats.doc_count, 1);
    }

    #[test]
    fn empty_stream_is_fatal() {
        let err = build_baseline(Vec::new(), &BaselineOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::NoDocuments(_)));
    }

    #[test]
    fn reservoir_is_seed_deterministic() {
        let run = |seed| {
            let mut r = Reservoir::new(10, seed);
            for i in 0..1000 {
                r.offer(i);
            }
            r.into_items()
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
        let mut small = Reservoir::new(10, 1);
        for i in 0..5 {
            small.offer(i);
        }
        assert_eq!(small.into_items(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn reservoir_is_roughly_uniform() {
        let mut hits = [0u32; 100];
        for seed in 0..2000 {
            let mut r = Reservoir::new(10, seed);
            for i in 0..100 {
                r.offer(i);
            }
            for i in r.into_items() {
                hits[i] += 1;
            }
        }
        // expected 200 each; binomial sd ~13.4
        assert!(hits.iter().all(|&h| (130..=270).contains(&h)), "{hits:?}");
    }

    #[test]
    fn sampling_limits_doc_count() {
        let texts: Vec<String> = (0..50).map(|i| format!("doc {i};")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let opts = BaselineOptions {
            sample_limit: Some(10),
            ..Default::default()
        };
        let a = build_baseline(raw(&refs), &opts).unwrap();
        let b = build_baseline(raw(&refs), &opts).unwrap();
        assert_eq!(a.stats.doc_count, 10);
        assert!(a.sampled);
        assert_eq!(a.seen, 50);
        assert_eq!(baseline_to_string(&a.stats), baseline_to_string(&b.stats));
        let big = BaselineOptions {
            sample_limit: Some(100),
            ..Default::default()
        };
        let c = build_baseline(raw(&refs), &big).unwrap();
        assert!(!c.sampled);
        assert_eq!(c.stats.doc_count, 50);
    }

    fn sample_stats() -> BaselineStats {
        let texts = ["a; b (c) d", "e \u{2014} f: g h", "However, it is. Robust!", "## H\n- x\n- y"];
        build_baseline(raw(&texts), &BaselineOptions::default()).unwrap().stats
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut stats = sample_stats();
        stats.features[FeatureId::Hedging].mu = 0.1 + 0.2;
        stats.features[FeatureId::Formal].sigma = 1.0 / 3.0;
        let back = baseline_from_str(&baseline_to_string(&stats)).unwrap();
        assert_eq!(back, stats);
        for (a, b) in back.features.0.iter().zip(stats.features.0.iter()) {
            assert_eq!(a.mu.to_bits(), b.mu.to_bits());
            assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
        }
    }

    #[test]
    fn load_rejects_incomplete_and_mismatched() {
        let text = baseline_to_string(&sample_stats());
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["features"].as_object_mut().unwrap().remove("robust");
        let err = baseline_from_str(&v.to_string()).unwrap_err();
        assert!(err.to_string().starts_with("incomplete baseline"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["taxonomy_version"] = "other/1".into();
        assert!(matches!(baseline_from_str(&v.to_string()), Err(CorpusError::TaxonomyMismatch { .. })));
    }

    #[test]
    fn validation_identity_and_degenerate() {
        let a = sample_stats();
        let rep = validate_baseline(&a, &a).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.pearson_r.unwrap() - 1.0).abs() < 1e-15);

        let mut flat = a.clone();
        for s in flat.features.0.iter_mut() {
            s.mu = 2.0;
        }
        let rep = validate_baseline(&flat, &flat).unwrap();
        assert_eq!(rep.verdict, Verdict::Degenerate);
        assert_eq!(rep.pearson_r, None);

        let mut other = a.clone();
        other.taxonomy_version = "x".into();
        assert!(validate_baseline(&a, &other).is_err());
    }

    #[test]
    fn se_gate_flags_noisy_features() {
        let mut stats = sample_stats();
        stats.doc_count = 4;
        stats.features[FeatureId::Semicolon] = FeatureStats {
            mu: 1.0,
            mu_pooled: 1.0,
            sigma: 2.0,
            cv: Some(2.0),
        };
        let w = standard_error_warnings(&stats);
        assert!(w.iter().any(|m| m.starts_with("semicolon")));
    }

    #[test]
    fn features_file_round_trip() {
        let docs = vec![
            Ok(RawDocument { id: "a".into(), text: "I might go \u{2014} perhaps; maybe...".into() }),
            Ok(RawDocument { id: "b".into(), text: "## T\n1. x\n2. y".into() }),
        ];
        let records = extract_stream(docs, 2).unwrap();
        let header = FeaturesHeader::new("t", &records, 0);
        let text = features_to_string(&header, &records);
        let (h, r) = features_from_str(&text).unwrap();
        assert_eq!(h, header);
        assert_eq!(r, records);
        assert_eq!(r[0].counts[FeatureId::Hedging], 3);
        let bad = text.replace(FEATURES_SCHEMA, "other/1");
        assert!(matches!(features_from_str(&bad), Err(CorpusError::Schema { .. })));
    }
}
