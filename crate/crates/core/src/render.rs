//! Tabular renderings of reports. Ratios are printed as ratios; the `_pct`
//! columns are the same numbers times 100.

use crate::ablation::SubsetAnalysis;
use crate::corpus::BaselineStats;
use crate::divergence::{ArStatus, DivergenceReport, FeatureRow, PairChange};
use crate::diversity::DiversityReport;
use crate::features::{FeatureId, FeatureVector};
use crate::mechsim::{Axis, SweepRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
}

impl Delimiter {
    fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, delimiter: Delimiter) -> String {
        let mut w = csv::WriterBuilder::new()
            .delimiter(delimiter.byte())
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Shortest round-trip decimal; empty for absent values.
pub fn num(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        Some(x) if x.is_nan() => "nan".into(),
        Some(x) if x > 0.0 => "inf".into(),
        Some(_) => "-inf".into(),
        None => String::new(),
    }
}

fn n(v: f64) -> String {
    num(Some(v))
}

fn pct(v: Option<f64>) -> String {
    num(v.map(|x| x * 100.0))
}

fn status_name(s: ArStatus) -> &'static str {
    match s {
        ArStatus::Defined => "defined",
        ArStatus::UnsupportedBaselineZero => "unsupported_baseline_zero",
        ArStatus::BothZero => "both_zero",
    }
}

/// One row per model.
pub fn model_table(reports: &[DivergenceReport]) -> Table {
    let mut t = Table::new(&[
        "model",
        "mean_ar",
        "mean_ar_pct",
        "sig_features",
        "divergent_features",
        "defined_features",
        "divergent_fraction",
        "max_ar",
        "max_feature",
        "distance_from_one",
        "hypothesis",
    ]);
    for r in reports {
        t.push(vec![
            r.model.clone(),
            n(r.mean_ar),
            pct(Some(r.mean_ar)),
            r.sig_feature_count.map(|c| c.to_string()).unwrap_or_default(),
            r.divergent_count().to_string(),
            r.defined_count.to_string(),
            n(r.divergent_fraction),
            n(r.max_ar),
            r.argmax.name().into(),
            n(r.distance_from_one),
            r.hypothesis.to_string(),
        ]);
    }
    t
}

/// Per-feature ratios of one report, highest AR first; undefined ratios
/// last in taxonomy order.
pub fn report_feature_table(report: &DivergenceReport) -> Table {
    let mut t = Table::new(&["feature", "category", "p_m", "p_c", "status", "ar", "ar_pct", "divergent", "excluded"]);
    let mut order: Vec<FeatureId> = FeatureId::ALL.to_vec();
    order.sort_by(|a, b| {
        let (x, y) = (report.ratios[*a].ar, report.ratios[*b].ar);
        match (x, y) {
            (Some(x), Some(y)) => y.total_cmp(&x).then(a.cmp(b)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.cmp(b),
        }
    });
    for id in order {
        let r = &report.ratios[id];
        t.push(vec![
            id.name().into(),
            id.category().name().into(),
            n(r.p_m),
            n(r.p_c),
            status_name(r.status).into(),
            num(r.ar),
            pct(r.ar),
            report.divergence_set.contains(&id).to_string(),
            report.excluded.contains(&id).to_string(),
        ]);
    }
    t
}

/// Cross-model per-feature summary.
pub fn feature_summary_table(rows: &[FeatureRow]) -> Table {
    let mut t = Table::new(&[
        "feature",
        "category",
        "models_defined",
        "mean_ar",
        "mean_ar_pct",
        "peak_ar",
        "peak_ar_pct",
        "peak_model",
        "mean_abs_deviation",
    ]);
    for r in rows {
        t.push(vec![
            r.feature.name().into(),
            r.feature.category().name().into(),
            r.models_defined.to_string(),
            num(r.mean_ar),
            pct(r.mean_ar),
            num(r.peak_ar),
            pct(r.peak_ar),
            r.peak_model.clone().unwrap_or_default(),
            num(r.mean_abs_deviation),
        ]);
    }
    t
}

/// Long format `(model, feature, log10_ar)`, one row per defined ratio.
pub fn heatmap_long(reports: &[DivergenceReport]) -> Table {
    let mut t = Table::new(&["model", "feature", "log10_ar"]);
    for r in reports {
        for id in FeatureId::ALL {
            if let Some(ar) = r.ar(id) {
                t.push(vec![r.model.clone(), id.name().into(), n(ar.log10())]);
            }
        }
    }
    t
}

pub fn pairwise_table(changes: &[PairChange]) -> Table {
    let mut t = Table::new(&[
        "base_model",
        "tuned_model",
        "base_mean_ar",
        "tuned_mean_ar",
        "change_pct",
        "p_value",
        "method",
        "resamples",
    ]);
    for c in changes {
        let (p, method, resamples) = match &c.test {
            Some(r) => (
                n(r.p_value),
                serde_json::to_value(r.method)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                r.resamples.map(|x| x.to_string()).unwrap_or_default(),
            ),
            None => Default::default(),
        };
        t.push(vec![
            c.base_model.clone(),
            c.tuned_model.clone(),
            n(c.base_mean_ar),
            n(c.tuned_mean_ar),
            num(c.change_pct),
            p,
            method,
            resamples,
        ]);
    }
    t
}

pub fn diversity_table(reports: &[DiversityReport]) -> Table {
    let mut t = Table::new(&[
        "sample",
        "self_bleu4",
        "distinct_2",
        "distinct_3",
        "distinct_4",
        "repetition",
        "vocab_diversity",
        "doc_count",
        "token_count",
    ]);
    for r in reports {
        t.push(vec![
            r.label.clone(),
            n(r.self_bleu4),
            num(r.distinct_2),
            num(r.distinct_3),
            num(r.distinct_4),
            n(r.repetition),
            n(r.vocab_diversity),
            r.doc_count.to_string(),
            r.token_count.to_string(),
        ]);
    }
    t
}

pub fn ablation_table(rows: &[SubsetAnalysis]) -> Table {
    let mut t = Table::new(&["subset", "n_features", "spearman_rho", "variance_pct", "mae", "models", "omitted"]);
    for r in rows {
        t.push(vec![
            r.subset.clone(),
            r.features.len().to_string(),
            num(r.spearman_rho),
            num(r.variance_captured),
            n(r.mae),
            r.models.to_string(),
            r.omitted.join(";"),
        ]);
    }
    t
}

pub fn simulate_table(axis: Axis, rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&["axis", "value", "amplification", "mc_stderr", "analytic", "mean_emissions"]);
    for r in rows {
        t.push(vec![
            axis.name().into(),
            n(r.value),
            num(r.outcome.amplification),
            num(r.outcome.mc_stderr),
            n(r.analytic),
            n(r.outcome.mean_emissions),
        ]);
    }
    t
}

pub fn baseline_table(stats: &BaselineStats) -> Table {
    let mut t = Table::new(&["feature", "category", "mu", "mu_pooled", "sigma", "cv"]);
    for id in FeatureId::ALL {
        let s = stats.stat(id);
        t.push(vec![
            id.name().into(),
            id.category().name().into(),
            n(s.mu),
            n(s.mu_pooled),
            n(s.sigma),
            num(s.cv),
        ]);
    }
    t
}

/// One row per document: id, token count, then the 24 frequencies.
pub fn features_table(rows: &[(String, FeatureVector)]) -> Table {
    let mut headers = vec!["id", "tokens"];
    headers.extend(FeatureId::ALL.iter().map(|f| f.name()));
    let mut t = Table::new(&headers);
    for (id, v) in rows {
        let mut row = vec![id.clone(), v.token_count.to_string()];
        row.extend(FeatureId::ALL.iter().map(|&f| n(v.values[f])));
        t.push(row);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{divergence_report, ratios_from_values};
    use crate::features::FEATURE_COUNT;

    #[test]
    fn quoting_and_tabs() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "plain".into()]);
        assert_eq!(t.render(Delimiter::Comma), "a,b\n\"x,y\",plain\n");
        assert_eq!(t.render(Delimiter::Tab), "a\tb\nx,y\tplain\n");
    }

    #[test]
    fn numbers() {
        assert_eq!(num(Some(0.1)), "0.1");
        assert_eq!(num(Some(2.0)), "2");
        assert_eq!(num(None), "");
        assert_eq!(num(Some(f64::NEG_INFINITY)), "-inf");
    }

    #[test]
    fn heatmap_rows_are_defined_ratios() {
        let mut v = [Some(10.0); FEATURE_COUNT];
        v[0] = None;
        let mut a = divergence_report(ratios_from_values(&v), 0.1, &[]).unwrap();
        a.model = "a".into();
        let mut b = divergence_report(ratios_from_values(&[Some(1.0); FEATURE_COUNT]), 0.1, &[]).unwrap();
        b.model = "b".into();
        let t = heatmap_long(&[a, b]);
        assert_eq!(t.rows.len(), 23 + 24);
        assert_eq!(t.rows[0], vec!["a", "semicolon", "1"]);
    }

    #[test]
    fn feature_table_sorted_by_ar() {
        let mut v = [Some(1.0); FEATURE_COUNT];
        v[FeatureId::Robust.index()] = Some(9.0);
        v[FeatureId::EmDash.index()] = None;
        let r = divergence_report(ratios_from_values(&v), 0.1, &[]).unwrap();
        let t = report_feature_table(&r);
        assert_eq!(t.rows[0][0], "robust");
        assert_eq!(t.rows[0][6], "900");
        assert_eq!(t.rows[23][0], "em_dash");
    }
}
