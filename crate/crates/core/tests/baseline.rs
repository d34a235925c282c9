use std::fs;

use stylodiv::corpus::{self, BaselineOptions, InputFormat, RawDocument, Verdict};
use stylodiv::features::FeatureId;
use stylodiv::synth::{self, Style};

const PILE: &str = include_str!("fixtures/pile_table6.json");

/// numpy.corrcoef over the Pile means against the same means with the
/// semicolon value doubled.
const DOUBLED_SEMICOLON_R: f64 = 0.9569012037930328;

#[test]
fn pile_file_echoes_published_values() {
    let b = corpus::baseline_from_str(PILE).unwrap();
    assert_eq!(b.stat(FeatureId::EmDash).mu, 0.038);
    assert_eq!(b.stat(FeatureId::Semicolon).mu, 0.876);
    assert_eq!(b.stat(FeatureId::Parenthetical).mu, 2.39);
    assert_eq!(b.stat(FeatureId::InConclusion).mu, 0.0014);
    assert_eq!(corpus::baseline_from_str(&corpus::baseline_to_string(&b)).unwrap(), b);
}

#[test]
fn pile_cv_membership() {
    let b = corpus::baseline_from_str(PILE).unwrap();
    assert_eq!(b.cv_over(0.5), 22);
    for id in FeatureId::ALL {
        let s = b.stat(id);
        assert_eq!(s.cv.is_some(), s.mu > 0.0, "{id}");
    }
    assert_eq!(b.stat(FeatureId::WorthNoting).cv, None);
    assert_eq!(b.stat(FeatureId::DelveInto).cv, Some(0.0));
}

#[test]
fn doubled_mean_matches_reference_pearson() {
    let a = corpus::baseline_from_str(PILE).unwrap();
    let mut b = a.clone();
    b.features[FeatureId::Semicolon].mu *= 2.0;
    let v = corpus::validate_baseline(&a, &b).unwrap();
    let r = v.pearson_r.unwrap();
    assert!((r - DOUBLED_SEMICOLON_R).abs() < 1e-10, "{r}");
    assert_eq!(v.verdict, Verdict::Pass);
    assert_eq!((v.cv_over_half_a, v.cv_over_half_b), (22, 22));
}

#[test]
fn planted_rates_are_recovered() {
    let docs = synth::generate(1000, 11, &Style::human());
    let stream = docs.iter().enumerate().map(|(i, d)| {
        Ok(RawDocument {
            id: i.to_string(),
            text: d.text.clone(),
        })
    });
    let b = corpus::build_baseline(stream, &BaselineOptions::default()).unwrap().stats;
    assert_eq!(b.doc_count, 1000);
    assert_eq!(b.token_count, docs.iter().map(|d| d.tokens).sum::<u64>());
    for id in FeatureId::ALL {
        let planted = docs.iter().map(|d| d.counts[id] as f64 * 1000.0 / d.tokens as f64).sum::<f64>() / 1000.0;
        let got = b.stat(id).mu;
        assert!((got - planted).abs() <= 1e-12 * planted.max(1.0), "{id}: {got} vs {planted}");
    }
}

#[test]
fn directory_ingest_is_lexicographic() {
    let dir = tempfile::tempdir().unwrap();
    for i in (0..100).rev() {
        fs::write(dir.path().join(format!("doc{i:03}.txt")), format!("document number {i}")).unwrap();
    }
    let docs: Vec<_> = corpus::ingest(dir.path(), &InputFormat::TxtDir)
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(docs.len(), 100);
    for (i, d) in docs.iter().enumerate() {
        assert_eq!(d.text, format!("document number {i}"));
    }
}

#[test]
fn sampled_baseline_is_reproducible() {
    let docs = synth::generate(300, 4, &Style::human());
    let build = || {
        let stream = docs.iter().enumerate().map(|(i, d)| {
            Ok(RawDocument {
                id: i.to_string(),
                text: d.text.clone(),
            })
        });
        let options = BaselineOptions {
            sample_limit: Some(100),
            workers: 3,
            ..BaselineOptions::default()
        };
        corpus::build_baseline(stream, &options).unwrap()
    };
    let (a, b) = (build(), build());
    assert!(a.sampled);
    assert_eq!(a.seen, 300);
    assert_eq!(a.stats.doc_count, 100);
    assert_eq!(corpus::baseline_to_string(&a.stats), corpus::baseline_to_string(&b.stats));
}
