//! Stylometric divergence auditing.
//!
//! Measures how a collection of texts deviates from a human-written baseline
//! across a fixed 24-feature taxonomy of punctuation, discourse markers,
//! sentence-initial markers, structural elements and tonal markers.
//!
//! The crate is organised bottom-up:
//!
//! * [`textmodel`] splits text into tokens, lines and sentences.
//! * [`features`] holds the taxonomy and the extraction engine.
//! * [`corpus`] ingests document streams and builds baseline statistics.
//! * [`divergence`] computes amplification ratios and divergence sets.
//! * [`diversity`] computes mode-collapse metrics (Self-BLEU, distinct-n, ...).
//! * [`stats`] provides permutation tests, correlations and Bonferroni.
//! * [`ablation`] evaluates how well feature subsets track the full taxonomy.
//! * [`mechsim`] simulates the context-shift / absorbing-state mechanism.
//! * [`render`] turns reports into CSV/TSV tables.
//! * [`synth`] generates synthetic corpora with known feature counts.

pub mod ablation;
pub mod corpus;
pub mod divergence;
pub mod diversity;
pub mod features;
pub mod mechsim;
pub mod parallel;
pub mod render;
pub mod stats;
pub mod synth;
pub mod textmodel;

pub use corpus::{BaselineStats, RawDocument};
pub use divergence::{AmplificationRatio, ArStatus, DivergenceReport};
pub use diversity::DiversityReport;
pub use features::{Category, FeatureId, FeatureVector, PerFeature};
pub use textmodel::Document;

/// Version tag of the feature taxonomy. Persisted artifacts carry it and
/// refuse to load under a different taxonomy.
pub const TAXONOMY_VERSION: &str = "stylodiv-taxonomy/24.1";

/// Version of this library, embedded in every emitted artifact.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
