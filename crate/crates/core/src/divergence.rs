//! Amplification ratios, divergence sets and per-model aggregates.
//!
//! All ratios are dimensionless (1.0 means the sample matches the
//! baseline). Percent renderings happen only in [`crate::render`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::BaselineStats;
use crate::features::{FeatureId, FeatureVector, PerFeature, FEATURE_COUNT};
use crate::stats::{self, TestResult};
use crate::{TAXONOMY_VERSION, TOOL_VERSION};

pub const REPORT_SCHEMA: &str = "stylodiv-report/1";
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DivergenceError {
    #[error("no comparable features (every feature is excluded or has a zero baseline)")]
    NoComparableFeatures,
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("taxonomy version mismatch: `{0}` vs `{1}`")]
    TaxonomyMismatch(String, String),
    #[error("no sample documents")]
    EmptySample,
}

/// Which baseline frequency plays the role of the corpus rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineView {
    /// Pooled counts over pooled tokens.
    #[default]
    Pooled,
    /// Unweighted mean of per-document frequencies.
    Mean,
}

impl BaselineView {
    pub fn rate(self, baseline: &BaselineStats, id: FeatureId) -> f64 {
        let s = baseline.stat(id);
        match self {
            BaselineView::Pooled => s.mu_pooled,
            BaselineView::Mean => s.mu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArStatus {
    Defined,
    UnsupportedBaselineZero,
    BothZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationRatio {
    pub feature: FeatureId,
    pub p_m: f64,
    pub p_c: f64,
    pub status: ArStatus,
    /// Present iff `status == Defined`.
    pub ar: Option<f64>,
}

impl AmplificationRatio {
    pub fn new(feature: FeatureId, p_m: f64, p_c: f64) -> Self {
        let (status, ar) = if p_c > 0.0 {
            (ArStatus::Defined, Some(p_m / p_c))
        } else if p_m > 0.0 {
            (ArStatus::UnsupportedBaselineZero, None)
        } else {
            (ArStatus::BothZero, None)
        };
        AmplificationRatio {
            feature,
            p_m,
            p_c,
            status,
            ar,
        }
    }
}

pub fn amplification_from(p_m: &PerFeature<f64>, p_c: &PerFeature<f64>) -> PerFeature<AmplificationRatio> {
    PerFeature::from_fn(|id| AmplificationRatio::new(id, p_m[id], p_c[id]))
}

/// Amplification ratios of a sample against a baseline.
pub fn amplification(sample: &FeatureVector, baseline: &BaselineStats, view: BaselineView) -> PerFeature<AmplificationRatio> {
    let p_c = PerFeature::from_fn(|id| view.rate(baseline, id));
    amplification_from(&sample.values, &p_c)
}

/// Whether `ar` falls outside the closed interval `[1 - delta, 1 + delta]`.
pub fn is_divergent(ar: f64, delta: f64) -> bool {
    ar < 1.0 - delta || ar > 1.0 + delta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Where an artifact came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub taxonomy_version: String,
    pub seed: u64,
    #[serde(default)]
    pub inputs: Vec<InputDigest>,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Provenance {
            tool_version: TOOL_VERSION.into(),
            taxonomy_version: TAXONOMY_VERSION.into(),
            seed,
            inputs: Vec::new(),
        }
    }
}

/// Sample-level detail needed to compare two reports statistically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDetail {
    pub doc_count: u64,
    pub token_count: u64,
    /// Per-document distance from 1.0 against the same baseline.
    pub per_output_scores: Vec<f64>,
    /// Per-feature maximum over documents (per 1000 tokens).
    pub max_frequency: PerFeature<f64>,
    /// Features whose per-output distribution differs from the baseline's
    /// per-document distribution at the Bonferroni-corrected level.
    pub sig_features: Vec<FeatureId>,
    pub sig_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub schema: String,
    pub model: String,
    pub baseline_label: String,
    pub baseline_view: BaselineView,
    pub delta: f64,
    pub ratios: PerFeature<AmplificationRatio>,
    pub excluded: Vec<FeatureId>,
    /// Features with a zero baseline and a nonzero sample rate.
    pub unsupported: Vec<FeatureId>,
    pub divergence_set: Vec<FeatureId>,
    pub defined_count: usize,
    pub divergent_fraction: f64,
    pub mean_ar: f64,
    pub max_ar: f64,
    pub argmax: FeatureId,
    pub distance_from_one: f64,
    /// `divergent_fraction > 0.5`.
    pub hypothesis: bool,
    #[serde(default)]
    pub sig_feature_count: Option<usize>,
    #[serde(default)]
    pub sample: Option<SampleDetail>,
    #[serde(default)]
    pub provenance: Option<Provenance>,
}

impl DivergenceReport {
    pub fn ar(&self, id: FeatureId) -> Option<f64> {
        if self.excluded.contains(&id) {
            None
        } else {
            self.ratios[id].ar
        }
    }

    pub fn divergent_count(&self) -> usize {
        self.divergence_set.len()
    }
}

/// Aggregates ratios into a report. Excluded and undefined features take no
/// part in any aggregate.
pub fn divergence_report(
    ratios: PerFeature<AmplificationRatio>,
    delta: f64,
    excluded: &[FeatureId],
) -> Result<DivergenceReport, DivergenceError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DivergenceError::InvalidDelta(delta));
    }
    let mut excluded: Vec<FeatureId> = excluded.to_vec();
    excluded.sort();
    excluded.dedup();
    let active = |id: &FeatureId| !excluded.contains(id);

    let defined: Vec<(FeatureId, f64)> = ratios
        .iter()
        .filter(|(id, _)| active(id))
        .filter_map(|(id, r)| r.ar.map(|ar| (id, ar)))
        .collect();
    if defined.is_empty() {
        return Err(DivergenceError::NoComparableFeatures);
    }
    let unsupported = ratios
        .iter()
        .filter(|(id, r)| active(id) && r.status == ArStatus::UnsupportedBaselineZero)
        .map(|(id, _)| id)
        .collect();
    let divergence_set: Vec<FeatureId> = defined
        .iter()
        .filter(|(_, ar)| is_divergent(*ar, delta))
        .map(|(id, _)| *id)
        .collect();
    let mean_ar = defined.iter().map(|(_, ar)| ar).sum::<f64>() / defined.len() as f64;
    let (argmax, max_ar) = defined
        .iter()
        .copied()
        .fold((defined[0].0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let divergent_fraction = divergence_set.len() as f64 / defined.len() as f64;
    Ok(DivergenceReport {
        schema: REPORT_SCHEMA.into(),
        model: String::new(),
        baseline_label: String::new(),
        baseline_view: BaselineView::default(),
        delta,
        ratios,
        excluded,
        unsupported,
        divergence_set,
        defined_count: defined.len(),
        divergent_fraction,
        mean_ar,
        max_ar,
        argmax,
        distance_from_one: (mean_ar - 1.0).abs(),
        hypothesis: divergent_fraction > 0.5,
        sig_feature_count: None,
        sample: None,
        provenance: None,
    })
}

/// Distance from 1.0 of one document's mean AR over the features defined
/// against `p_c`. `None` when no feature is comparable.
pub fn document_score(doc: &FeatureVector, p_c: &PerFeature<f64>, excluded: &[FeatureId]) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for id in FeatureId::ALL {
        if p_c[id] > 0.0 && !excluded.contains(&id) {
            sum += doc.values[id] / p_c[id];
            n += 1;
        }
    }
    (n > 0).then(|| (sum / n as f64 - 1.0).abs())
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub model: String,
    pub delta: f64,
    pub view: BaselineView,
    pub excluded: Vec<FeatureId>,
    pub alpha: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            model: "model".into(),
            delta: DEFAULT_DELTA,
            view: BaselineView::Pooled,
            excluded: Vec::new(),
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Full per-model analysis: pool the per-document vectors, compute ratios
/// and aggregates, per-output scores and the significant-feature count.
pub fn analyze_sample(
    docs: &[FeatureVector],
    baseline: &BaselineStats,
    options: &AnalysisOptions,
) -> Result<DivergenceReport, DivergenceError> {
    if baseline.taxonomy_version != TAXONOMY_VERSION {
        return Err(DivergenceError::TaxonomyMismatch(
            baseline.taxonomy_version.clone(),
            TAXONOMY_VERSION.into(),
        ));
    }
    let pooled = crate::features::aggregate(docs).map_err(|_| DivergenceError::EmptySample)?;
    let ratios = amplification(&pooled, baseline, options.view);
    let mut report = divergence_report(ratios, options.delta, &options.excluded)?;
    report.model = options.model.clone();
    report.baseline_label = baseline.corpus_label.clone();
    report.baseline_view = options.view;

    let p_c = PerFeature::from_fn(|id| options.view.rate(baseline, id));
    let per_output_scores = docs
        .iter()
        .map(|d| document_score(d, &p_c, &report.excluded).expect("at least one feature is defined"))
        .collect();
    let max_frequency = crate::features::max_over_docs(docs).map_err(|_| DivergenceError::EmptySample)?;

    let tested: Vec<FeatureId> = FeatureId::ALL
        .into_iter()
        .filter(|id| !report.excluded.contains(id))
        .collect();
    let sig_alpha = stats::bonferroni(options.alpha, tested.len().max(1));
    let mut sig_features = Vec::new();
    if docs.len() >= 2 && baseline.doc_count >= 2 {
        for &id in &tested {
            let sample: Vec<f64> = docs.iter().map(|d| d.values[id]).collect();
            let s = baseline.stat(id);
            if let Ok(t) = stats::welch_vs_summary(&sample, s.mu, s.sigma, baseline.doc_count) {
                if t.p_value < sig_alpha {
                    sig_features.push(id);
                }
            }
        }
        report.sig_feature_count = Some(sig_features.len());
    }
    report.sample = Some(SampleDetail {
        doc_count: pooled.doc_count,
        token_count: pooled.token_count,
        per_output_scores,
        max_frequency,
        sig_features,
        sig_alpha,
    });
    Ok(report)
}

/// One row of the cross-model feature summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub feature: FeatureId,
    pub models_defined: usize,
    pub mean_ar: Option<f64>,
    pub peak_ar: Option<f64>,
    pub peak_model: Option<String>,
    /// Mean of |AR - 1| over models with a defined AR.
    pub mean_abs_deviation: Option<f64>,
}

/// Per-feature mean and peak AR across models.
pub fn feature_table(reports: &[DivergenceReport]) -> Vec<FeatureRow> {
    FeatureId::ALL
        .iter()
        .map(|&id| {
            let defined: Vec<(&str, f64)> = reports
                .iter()
                .filter_map(|r| r.ar(id).map(|ar| (r.model.as_str(), ar)))
                .collect();
            if defined.is_empty() {
                return FeatureRow {
                    feature: id,
                    models_defined: 0,
                    mean_ar: None,
                    peak_ar: None,
                    peak_model: None,
                    mean_abs_deviation: None,
                };
            }
            let n = defined.len() as f64;
            let (peak_model, peak) = defined
                .iter()
                .copied()
                .fold(defined[0], |best, cur| if cur.1 > best.1 { cur } else { best });
            FeatureRow {
                feature: id,
                models_defined: defined.len(),
                mean_ar: Some(defined.iter().map(|d| d.1).sum::<f64>() / n),
                peak_ar: Some(peak),
                peak_model: Some(peak_model.to_string()),
                mean_abs_deviation: Some(defined.iter().map(|d| (d.1 - 1.0).abs()).sum::<f64>() / n),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChange {
    pub base_model: String,
    pub tuned_model: String,
    pub base_mean_ar: f64,
    pub tuned_mean_ar: f64,
    /// Percent change of mean AR; `None` when the base mean AR is zero.
    pub change_pct: Option<f64>,
    #[serde(default)]
    pub test: Option<TestResult>,
}

pub fn pairwise_change(base: &DivergenceReport, tuned: &DivergenceReport) -> PairChange {
    let change_pct = (base.mean_ar != 0.0).then(|| (tuned.mean_ar - base.mean_ar) / base.mean_ar * 100.0);
    PairChange {
        base_model: base.model.clone(),
        tuned_model: tuned.model.clone(),
        base_mean_ar: base.mean_ar,
        tuned_mean_ar: tuned.mean_ar,
        change_pct,
        test: None,
    }
}

/// Builds a ratio set straight from AR values (p_c = 1), for synthetic
/// panels and tests. `None` entries become zero-baseline features.
pub fn ratios_from_values(values: &[Option<f64>; FEATURE_COUNT]) -> PerFeature<AmplificationRatio> {
    PerFeature::from_fn(|id| match values[id.index()] {
        Some(ar) => AmplificationRatio::new(id, ar, 1.0),
        None => AmplificationRatio::new(id, 0.0, 0.0),
    })
}
