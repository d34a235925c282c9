//! Mode-collapse metrics over a set of samples.
//!
//! Tokens are the whitespace tokens of [`crate::textmodel`], lowercased.
//! N-grams never cross document boundaries.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divergence::Provenance;
use crate::parallel;
use crate::textmodel;

pub const DIVERSITY_SCHEMA: &str = "stylodiv-diversity/1";
pub const BLEU_EPSILON: f64 = 1e-9;
pub const BLEU_MAX_ORDER: usize = 4;
const REPETITION_N: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiversityError {
    #[error("self-BLEU needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),
    #[error("sample set has no tokens")]
    NoTokens,
    #[error("no documents")]
    Empty,
}

/// Documents as interned token ids.
#[derive(Debug, Clone)]
pub struct TokenizedSet {
    docs: Vec<Vec<u32>>,
    vocab_size: usize,
}

impl TokenizedSet {
    pub fn new<S: AsRef<str>>(texts: &[S]) -> Self {
        let mut vocab: HashMap<String, u32> = HashMap::new();
        let docs = texts
            .iter()
            .map(|t| {
                let normalized = textmodel::normalize(t.as_ref());
                textmodel::tokenize(&normalized)
                    .map(|tok| {
                        let key = tok.to_lowercase();
                        let next = vocab.len() as u32;
                        *vocab.entry(key).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        TokenizedSet {
            docs,
            vocab_size: vocab.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn token_count(&self) -> u64 {
        self.docs.iter().map(|d| d.len() as u64).sum()
    }

    pub fn docs(&self) -> &[Vec<u32>] {
        &self.docs
    }
}

fn ngram_counts(doc: &[u32], n: usize) -> HashMap<&[u32], u32> {
    let mut m = HashMap::new();
    if doc.len() >= n {
        for g in doc.windows(n) {
            *m.entry(g).or_insert(0) += 1;
        }
    }
    m
}

/// Two largest per-document counts of one n-gram, with the owning docs.
#[derive(Debug, Clone, Copy, Default)]
struct Top2 {
    first: (u32, usize),
    second: (u32, usize),
}

impl Top2 {
    fn offer(&mut self, count: u32, doc: usize) {
        if count > self.first.0 {
            self.second = self.first;
            self.first = (count, doc);
        } else if count > self.second.0 {
            self.second = (count, doc);
        }
    }

    fn max_excluding(&self, doc: usize) -> u32 {
        if self.first.0 > 0 && self.first.1 == doc {
            self.second.0
        } else {
            self.first.0
        }
    }
}

/// Closest reference length to `len` among all lengths except one copy of
/// `len` itself. Ties go to the shorter length.
fn closest_other_length(sorted: &[usize], len: usize) -> usize {
    let lo = sorted.partition_point(|&l| l < len);
    let hi = sorted.partition_point(|&l| l <= len);
    if hi - lo >= 2 {
        return len;
    }
    let below = lo.checked_sub(1).map(|i| sorted[i]);
    let above = sorted.get(hi).copied();
    match (below, above) {
        (Some(b), Some(a)) => {
            if len - b <= a - len {
                b
            } else {
                a
            }
        }
        (Some(b), None) => b,
        (None, Some(a)) => a,
        (None, None) => len,
    }
}

/// BLEU from clipped counts, totals and lengths, with the epsilon floor for
/// empty precisions.
pub fn bleu_from_counts(clipped: &[u64], totals: &[u64], hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len == 0 {
        return 0.0;
    }
    let n = clipped.len() as f64;
    let log_p: f64 = clipped
        .iter()
        .zip(totals)
        .map(|(&c, &t)| {
            if c == 0 || t == 0 {
                BLEU_EPSILON.ln()
            } else {
                (c as f64 / t as f64).ln()
            }
        })
        .sum::<f64>()
        / n;
    let bp = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    bp * log_p.exp()
}

/// Mean BLEU-4 of each document against all the others as joint references.
pub fn self_bleu4(set: &TokenizedSet, workers: usize) -> Result<f64, DiversityError> {
    let k = set.len();
    if k < 2 {
        return Err(DiversityError::TooFewDocuments(k));
    }
    let docs = &set.docs;
    let per_order: Vec<Vec<HashMap<&[u32], u32>>> = (1..=BLEU_MAX_ORDER)
        .map(|n| parallel::map_indices(k, workers, |i| ngram_counts(&docs[i], n)))
        .collect();
    let tops: Vec<HashMap<&[u32], Top2>> = per_order
        .iter()
        .map(|counts| {
            let mut top: HashMap<&[u32], Top2> = HashMap::new();
            for (doc, m) in counts.iter().enumerate() {
                for (&g, &c) in m {
                    top.entry(g).or_default().offer(c, doc);
                }
            }
            top
        })
        .collect();
    let mut lengths: Vec<usize> = docs.iter().map(|d| d.len()).collect();
    lengths.sort_unstable();

    let scores = parallel::map_indices(k, workers, |i| {
        let hyp_len = docs[i].len();
        let mut clipped = [0u64; BLEU_MAX_ORDER];
        let mut totals = [0u64; BLEU_MAX_ORDER];
        for n in 0..BLEU_MAX_ORDER {
            totals[n] = (hyp_len + 1).saturating_sub(n + 1) as u64;
            for (g, &c) in &per_order[n][i] {
                let other = tops[n][g].max_excluding(i);
                clipped[n] += c.min(other) as u64;
            }
        }
        bleu_from_counts(&clipped, &totals, hyp_len, closest_other_length(&lengths, hyp_len))
    });
    Ok(scores.iter().sum::<f64>() / k as f64)
}

/// Corpus-level unique n-grams over total n-gram positions.
pub fn distinct_n(set: &TokenizedSet, n: usize) -> Option<f64> {
    assert!(n >= 1, "n-gram order must be positive");
    let mut unique: HashSet<&[u32]> = HashSet::new();
    let mut total = 0u64;
    for d in &set.docs {
        if d.len() >= n {
            total += (d.len() - n + 1) as u64;
            unique.extend(d.windows(n));
        }
    }
    (total > 0).then(|| unique.len() as f64 / total as f64)
}

fn doc_repetition(doc: &[u32]) -> f64 {
    if doc.len() < REPETITION_N {
        return 0.0;
    }
    let mut seen = HashSet::new();
    let mut repeats = 0usize;
    let positions = doc.len() - REPETITION_N + 1;
    for g in doc.windows(REPETITION_N) {
        if !seen.insert(g) {
            repeats += 1;
        }
    }
    repeats as f64 / positions as f64
}

/// Mean over documents of the fraction of 4-gram positions that repeat an
/// earlier 4-gram of the same document.
pub fn repetition_rate(set: &TokenizedSet) -> Result<f64, DiversityError> {
    if set.is_empty() {
        return Err(DiversityError::Empty);
    }
    Ok(set.docs.iter().map(|d| doc_repetition(d)).sum::<f64>() / set.len() as f64)
}

/// Corpus type-token ratio.
pub fn vocab_diversity(set: &TokenizedSet) -> Result<f64, DiversityError> {
    let tokens = set.token_count();
    if tokens == 0 {
        return Err(DiversityError::NoTokens);
    }
    Ok(set.vocab_size as f64 / tokens as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub schema: String,
    pub label: String,
    pub doc_count: u64,
    pub token_count: u64,
    pub self_bleu4: f64,
    pub distinct_2: Option<f64>,
    pub distinct_3: Option<f64>,
    pub distinct_4: Option<f64>,
    pub repetition: f64,
    pub vocab_diversity: f64,
    /// Plain-language definitions of the metrics.
    pub definitions: Vec<(String, String)>,
    #[serde(default)]
    pub provenance: Option<Provenance>,
}

pub fn metric_definitions() -> Vec<(String, String)> {
    [
        ("self_bleu4", "mean BLEU (orders 1-4, uniform weights, brevity penalty, epsilon 1e-9) of each document against all other documents as joint references"),
        ("distinct_n", "corpus-level unique n-grams / total n-gram positions; n-grams do not cross documents"),
        ("repetition", "tool-defined: per document, fraction of 4-gram positions whose 4-gram already occurred earlier in that document; mean over documents, documents under 4 tokens count 0"),
        ("vocab_diversity", "tool-defined: corpus type-token ratio over lowercased whitespace tokens"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

pub fn diversity_report<S: AsRef<str>>(label: &str, texts: &[S], workers: usize) -> Result<DiversityReport, DiversityError> {
    let set = TokenizedSet::new(texts);
    Ok(DiversityReport {
        schema: DIVERSITY_SCHEMA.into(),
        label: label.into(),
        doc_count: set.len() as u64,
        token_count: set.token_count(),
        vocab_diversity: vocab_diversity(&set)?,
        self_bleu4: self_bleu4(&set, workers)?,
        distinct_2: distinct_n(&set, 2),
        distinct_3: distinct_n(&set, 3),
        distinct_4: distinct_n(&set, 4),
        repetition: repetition_rate(&set)?,
        definitions: metric_definitions(),
        provenance: None,
    })
}
