//! Browser bindings for the demo page in `www/`.
//!
//! Every function takes plain strings and numbers and returns a JSON
//! string; errors come back as `{"error": "..."}`. Multi-document inputs
//! separate documents with a line containing only `---`.

use serde::Serialize;
use stylodiv::corpus::{self, BaselineOptions, RawDocument};
use stylodiv::divergence::{self, AnalysisOptions};
use stylodiv::features::{self, FeatureId};
use stylodiv::mechsim::{self, Axis, MechanismParams};
use stylodiv::{diversity, Document};
use wasm_bindgen::prelude::*;

pub const SEPARATOR: &str = "---";

/// Splits on separator lines, dropping blank documents.
pub fn split_documents(text: &str) -> Vec<String> {
    let mut docs = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim() == SEPARATOR {
            docs.push(std::mem::take(&mut current));
        } else {
            current.push_str(line);
            current.push('\n');
        }
    }
    docs.push(current);
    docs.into_iter().filter(|d| !d.trim().is_empty()).collect()
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error(e.to_string())),
        Err(e) => error(e),
    }
}

fn error(msg: String) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

#[derive(Serialize)]
struct FeatureLine {
    feature: &'static str,
    category: &'static str,
    reference_count: u64,
    sample_count: u64,
    p_c: f64,
    p_m: f64,
    ar: Option<f64>,
    divergent: bool,
}

#[derive(Serialize)]
struct Comparison {
    reference_docs: u64,
    reference_tokens: u64,
    sample_docs: u64,
    sample_tokens: u64,
    mean_ar: f64,
    divergent_count: usize,
    defined_count: usize,
    divergent_fraction: f64,
    distance_from_one: f64,
    hypothesis: bool,
    max_feature: &'static str,
    features: Vec<FeatureLine>,
}

fn raw(docs: &[String]) -> impl Iterator<Item = Result<RawDocument, corpus::CorpusError>> + '_ {
    docs.iter().enumerate().map(|(i, t)| {
        Ok(RawDocument {
            id: i.to_string(),
            text: t.clone(),
        })
    })
}

/// Builds a baseline from `reference`, then scores `sample` against it.
pub fn compare(reference: &str, sample: &str, delta: f64) -> Result<impl Serialize, String> {
    let ref_docs = split_documents(reference);
    let sample_docs = split_documents(sample);
    if ref_docs.is_empty() || sample_docs.is_empty() {
        return Err("both texts need at least one non-empty document".into());
    }
    let options = BaselineOptions {
        label: "reference".into(),
        ..BaselineOptions::default()
    };
    let base = corpus::build_baseline(raw(&ref_docs), &options).map_err(|e| e.to_string())?.stats;
    let vectors: Vec<_> = sample_docs.iter().map(|t| features::extract(&Document::new("", t))).collect();
    let report = divergence::analyze_sample(
        &vectors,
        &base,
        &AnalysisOptions {
            model: "sample".into(),
            delta,
            ..AnalysisOptions::default()
        },
    )
    .map_err(|e| e.to_string())?;

    let count = |docs: &[String], id: FeatureId| -> u64 {
        docs.iter().map(|t| features::count(&Document::new("", t))[id]).sum()
    };
    let features = FeatureId::ALL
        .iter()
        .map(|&id| {
            let r = &report.ratios[id];
            FeatureLine {
                feature: id.name(),
                category: id.category().name(),
                reference_count: count(&ref_docs, id),
                sample_count: count(&sample_docs, id),
                p_c: r.p_c,
                p_m: r.p_m,
                ar: r.ar,
                divergent: report.divergence_set.contains(&id),
            }
        })
        .collect();
    let sample = report.sample.as_ref().expect("analysis records the sample");
    Ok(Comparison {
        reference_docs: base.doc_count,
        reference_tokens: base.token_count,
        sample_docs: sample.doc_count,
        sample_tokens: sample.token_count,
        mean_ar: report.mean_ar,
        divergent_count: report.divergent_count(),
        defined_count: report.defined_count,
        divergent_fraction: report.divergent_fraction,
        distance_from_one: report.distance_from_one,
        hypothesis: report.hypothesis,
        max_feature: report.argmax.name(),
        features,
    })
}

#[wasm_bindgen]
pub fn compare_texts(reference: &str, sample: &str, delta: f64) -> String {
    to_json(compare(reference, sample, delta))
}

#[wasm_bindgen]
pub fn diversity_metrics(samples: &str) -> String {
    let docs = split_documents(samples);
    to_json(diversity::diversity_report("samples", &docs, 1).map_err(|e| e.to_string()))
}

#[derive(Serialize)]
struct SweepPoint {
    value: f64,
    amplification: Option<f64>,
    mc_stderr: Option<f64>,
    analytic: f64,
    mean_emissions: f64,
}

pub fn sweep(axis: &str, grid: &[f64], params: MechanismParams) -> Result<Vec<impl Serialize>, String> {
    let axis = Axis::from_name(axis).ok_or_else(|| format!("unknown axis `{axis}`"))?;
    params.validate().map_err(|e| e.to_string())?;
    let rows = mechsim::sweep(&params, axis, grid, 1).map_err(|e| e.to_string())?;
    Ok(rows
        .into_iter()
        .map(|r| SweepPoint {
            value: r.value,
            amplification: r.outcome.amplification,
            mc_stderr: r.outcome.mc_stderr,
            analytic: r.analytic,
            mean_emissions: r.outcome.mean_emissions,
        })
        .collect())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate_sweep(
    axis: &str,
    grid: &[f64],
    context_shift: f64,
    trigger_rate_formal: f64,
    trigger_rate_mixture: f64,
    absorption: f64,
    steps: u32,
    episodes: u32,
    seed: u32,
) -> String {
    let params = MechanismParams {
        context_shift,
        trigger_rate_formal,
        trigger_rate_mixture,
        absorption,
        steps: steps as u64,
        episodes: episodes as u64,
        seed: seed as u64,
    };
    to_json(sweep(axis, grid, params))
}
