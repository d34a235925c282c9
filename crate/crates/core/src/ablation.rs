//! How well a feature subset's divergence scores track the full taxonomy's.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divergence::{self, DivergenceReport, FeatureRow};
use crate::features::{Category, FeatureId};
use crate::stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AblationError {
    #[error("empty feature subset")]
    EmptySubset,
    #[error("unknown subset preset `{0}`")]
    UnknownPreset(String),
    #[error("need at least 3 paired scores, got {0}")]
    TooFewModels(usize),
    #[error("score vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Highest mean |AR - 1| in the reference panel, in rank order.
pub const TOP10: [FeatureId; 10] = [
    FeatureId::MarkdownHeader,
    FeatureId::InConclusion,
    FeatureId::DelveInto,
    FeatureId::BulletPoint,
    FeatureId::Landscape,
    FeatureId::NumberedList,
    FeatureId::Navigate,
    FeatureId::Robust,
    FeatureId::Fundamentally,
    FeatureId::HoweverStart,
];

/// Preset names in table order.
pub const PRESETS: [&str; 7] = ["full", "top10", "structural", "discourse", "tonal", "punctuation", "sentence_start"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subset {
    pub name: String,
    pub features: Vec<FeatureId>,
}

impl Subset {
    pub fn new(name: impl Into<String>, features: &[FeatureId]) -> Result<Self, AblationError> {
        let mut features = features.to_vec();
        features.sort();
        features.dedup();
        if features.is_empty() {
            return Err(AblationError::EmptySubset);
        }
        Ok(Subset {
            name: name.into(),
            features,
        })
    }

    pub fn preset(name: &str) -> Result<Self, AblationError> {
        let features: Vec<FeatureId> = match name {
            "full" => FeatureId::ALL.to_vec(),
            "top10" => TOP10.to_vec(),
            other => {
                let cat = Category::ALL
                    .into_iter()
                    .find(|c| c.name() == other)
                    .ok_or_else(|| AblationError::UnknownPreset(other.into()))?;
                cat.features().collect()
            }
        };
        Subset::new(name, &features)
    }

    /// A preset name, or a comma-separated list of feature names.
    pub fn parse(spec: &str) -> Result<Self, AblationError> {
        if let Ok(p) = Subset::preset(spec) {
            return Ok(p);
        }
        let features = spec
            .split(',')
            .map(|s| FeatureId::from_name(s.trim()).ok_or_else(|| AblationError::UnknownPreset(s.trim().into())))
            .collect::<Result<Vec<_>, _>>()?;
        Subset::new(spec, &features)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScores {
    pub models: Vec<String>,
    pub scores: Vec<f64>,
    /// Models with no defined AR inside the subset.
    pub omitted: Vec<String>,
}

/// Distance from 1.0 of each model's mean AR over the subset, using the same
/// aggregation as the full report.
pub fn subset_divergence(reports: &[DivergenceReport], subset: &Subset) -> SubsetScores {
    let mut out = SubsetScores {
        models: Vec::new(),
        scores: Vec::new(),
        omitted: Vec::new(),
    };
    for r in reports {
        let excluded: Vec<FeatureId> = FeatureId::ALL
            .into_iter()
            .filter(|id| !subset.features.contains(id) || r.excluded.contains(id))
            .collect();
        match divergence::divergence_report(r.ratios, r.delta, &excluded) {
            Ok(sub) => {
                out.models.push(r.model.clone());
                out.scores.push(sub.distance_from_one);
            }
            Err(_) => out.omitted.push(r.model.clone()),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetAnalysis {
    pub subset: String,
    pub features: Vec<FeatureId>,
    /// `None` when either score vector has zero variance.
    pub spearman_rho: Option<f64>,
    /// 100 * Pearson r squared; `None` when degenerate.
    pub variance_captured: Option<f64>,
    pub mae: f64,
    pub models: usize,
    #[serde(default)]
    pub omitted: Vec<String>,
}

pub fn analyze_subset(full: &[f64], subset: &[f64]) -> Result<(Option<f64>, Option<f64>, f64), AblationError> {
    if full.len() != subset.len() {
        return Err(AblationError::LengthMismatch(full.len(), subset.len()));
    }
    if full.len() < 3 {
        return Err(AblationError::TooFewModels(full.len()));
    }
    let mae = full.iter().zip(subset).map(|(a, b)| (a - b).abs()).sum::<f64>() / full.len() as f64;
    let rho = stats::spearman(full, subset).ok().map(|t| t.statistic);
    let variance = stats::pearson_r(full, subset).map(|r| 100.0 * r * r);
    Ok((rho, variance, mae))
}

/// Scores every subset against the full taxonomy over the models both
/// cover.
pub fn run_ablation(reports: &[DivergenceReport], subsets: &[Subset]) -> Result<Vec<SubsetAnalysis>, AblationError> {
    let full = subset_divergence(reports, &Subset::preset("full")?);
    subsets
        .iter()
        .map(|s| {
            let part = subset_divergence(reports, s);
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (m, score) in part.models.iter().zip(&part.scores) {
                if let Some(i) = full.models.iter().position(|x| x == m) {
                    a.push(full.scores[i]);
                    b.push(*score);
                }
            }
            let (rho, variance, mae) = analyze_subset(&a, &b)?;
            Ok(SubsetAnalysis {
                subset: s.name.clone(),
                features: s.features.clone(),
                spearman_rho: rho,
                variance_captured: variance,
                mae,
                models: a.len(),
                omitted: part.omitted,
            })
        })
        .collect()
}

/// Features ordered by descending mean |AR - 1|; ties keep taxonomy order.
pub fn top_k_by_divergence(table: &[FeatureRow], k: usize) -> Vec<FeatureId> {
    let mut rows: Vec<(FeatureId, f64)> = table
        .iter()
        .filter_map(|r| r.mean_abs_deviation.map(|d| (r.feature, d)))
        .collect();
    rows.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    rows.into_iter().take(k).map(|r| r.0).collect()
}
