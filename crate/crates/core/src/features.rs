//! The 24-feature taxonomy and its extraction engine.
//!
//! Every feature is a pure, total counting rule over a [`Document`].
//! Frequencies are reported in occurrences per 1,000 tokens.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;
use std::sync::OnceLock;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::textmodel::Document;

pub const FEATURE_COUNT: usize = 24;

/// Frequency unit: occurrences per this many tokens.
pub const PER_TOKENS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Punctuation,
    Discourse,
    SentenceStart,
    Structural,
    Tonal,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::Punctuation,
        Category::Discourse,
        Category::SentenceStart,
        Category::Structural,
        Category::Tonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Punctuation => "punctuation",
            Category::Discourse => "discourse",
            Category::SentenceStart => "sentence_start",
            Category::Structural => "structural",
            Category::Tonal => "tonal",
        }
    }

    pub fn features(self) -> impl Iterator<Item = FeatureId> {
        FeatureId::ALL.into_iter().filter(move |f| f.category() == self)
    }
}

macro_rules! feature_ids {
    ($($variant:ident => $name:literal, $cat:ident;)*) => {
        /// One of the 24 stylistic features. Declaration order is the stable
        /// taxonomy order used for every table and file.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum FeatureId { $($variant),* }

        impl FeatureId {
            pub const ALL: [FeatureId; FEATURE_COUNT] = [$(FeatureId::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(FeatureId::$variant => $name),* }
            }

            pub fn category(self) -> Category {
                match self { $(FeatureId::$variant => Category::$cat),* }
            }

            pub fn from_name(name: &str) -> Option<FeatureId> {
                match name { $($name => Some(FeatureId::$variant),)* _ => None }
            }
        }
    };
}

feature_ids! {
    EmDash => "em_dash", Punctuation;
    Semicolon => "semicolon", Punctuation;
    ColonMid => "colon_mid", Punctuation;
    Ellipsis => "ellipsis", Punctuation;
    Parenthetical => "parenthetical", Punctuation;
    DelveInto => "delve_into", Discourse;
    WorthNoting => "worth_noting", Discourse;
    InConclusion => "in_conclusion", Discourse;
    ThatBeingSaid => "that_being_said", Discourse;
    Arguably => "arguably", Discourse;
    Essentially => "essentially", Discourse;
    Fundamentally => "fundamentally", Discourse;
    Navigate => "navigate", Discourse;
    Landscape => "landscape", Discourse;
    Robust => "robust", Discourse;
    HoweverStart => "however_start", SentenceStart;
    CertainlyStart => "certainly_start", SentenceStart;
    AbsolutelyStart => "absolutely_start", SentenceStart;
    NumberedList => "numbered_list", Structural;
    BulletPoint => "bullet_point", Structural;
    MarkdownHeader => "markdown_header", Structural;
    Hedging => "hedging", Tonal;
    Apologetic => "apologetic", Tonal;
    Formal => "formal", Tonal;
}

impl FeatureId {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("unknown feature `{0}`")]
pub struct UnknownFeature(pub String);

impl FromStr for FeatureId {
    type Err = UnknownFeature;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureId::from_name(s).ok_or_else(|| UnknownFeature(s.to_string()))
    }
}

impl Serialize for FeatureId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for FeatureId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        FeatureId::from_name(&name).ok_or_else(|| de::Error::custom(format!("unknown feature `{name}`")))
    }
}

/// A value for every feature, indexed by [`FeatureId`]. Serializes as a flat
/// map keyed by feature name in taxonomy order; deserialization requires all
/// 24 keys.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerFeature<T>(pub [T; FEATURE_COUNT]);

impl<T: Default + Copy> Default for PerFeature<T> {
    fn default() -> Self {
        PerFeature([T::default(); FEATURE_COUNT])
    }
}

impl<T> PerFeature<T> {
    pub fn from_fn(mut f: impl FnMut(FeatureId) -> T) -> Self {
        PerFeature(std::array::from_fn(|i| f(FeatureId::ALL[i])))
    }

    pub fn iter(&self) -> impl Iterator<Item = (FeatureId, &T)> {
        FeatureId::ALL.into_iter().zip(self.0.iter())
    }

    pub fn map<U>(&self, mut f: impl FnMut(FeatureId, &T) -> U) -> PerFeature<U> {
        PerFeature::from_fn(|id| f(id, &self.0[id.index()]))
    }
}

impl<T> Index<FeatureId> for PerFeature<T> {
    type Output = T;
    fn index(&self, id: FeatureId) -> &T {
        &self.0[id.index()]
    }
}

impl<T> IndexMut<FeatureId> for PerFeature<T> {
    fn index_mut(&mut self, id: FeatureId) -> &mut T {
        &mut self.0[id.index()]
    }
}

impl<T: Serialize> Serialize for PerFeature<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(FEATURE_COUNT))?;
        for (id, v) in self.iter() {
            map.serialize_entry(id.name(), v)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for PerFeature<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct PerFeatureVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for PerFeatureVisitor<T> {
            type Value = PerFeature<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map with one entry per feature")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut slots: [Option<T>; FEATURE_COUNT] = std::array::from_fn(|_| None);
                while let Some(key) = map.next_key::<String>()? {
                    let id = FeatureId::from_name(&key)
                        .ok_or_else(|| de::Error::custom(format!("unknown feature `{key}`")))?;
                    if slots[id.index()].is_some() {
                        return Err(de::Error::custom(format!("duplicate feature `{key}`")));
                    }
                    slots[id.index()] = Some(map.next_value()?);
                }
                if let Some(missing) = FeatureId::ALL.iter().find(|id| slots[id.index()].is_none()) {
                    return Err(de::Error::custom(format!("incomplete: missing feature `{missing}`")));
                }
                Ok(PerFeature(slots.map(|s| s.expect("checked above"))))
            }
        }

        d.deserialize_map(PerFeatureVisitor(std::marker::PhantomData))
    }
}

/// Raw occurrence counts for one document or a pool of documents.
pub type FeatureCounts = PerFeature<u64>;

/// Per-1000-token frequencies plus the raw counts they were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: PerFeature<f64>,
    pub counts: FeatureCounts,
    pub token_count: u64,
    pub doc_count: u64,
}

impl FeatureVector {
    pub fn from_counts(counts: FeatureCounts, token_count: u64, doc_count: u64) -> Self {
        let values = counts.map(|_, &c| frequency(c, token_count));
        FeatureVector {
            values,
            counts,
            token_count,
            doc_count,
        }
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        self.values[id]
    }
}

/// `count` per 1,000 tokens; zero when there are no tokens.
pub fn frequency(count: u64, tokens: u64) -> f64 {
    if tokens == 0 {
        0.0
    } else {
        count as f64 * PER_TOKENS / tokens as f64
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("cannot aggregate an empty sequence of feature vectors")]
    EmptySequence,
}

const DISCOURSE: [(&str, FeatureId); 10] = [
    ("delve into", FeatureId::DelveInto),
    ("it's worth noting", FeatureId::WorthNoting),
    ("in conclusion", FeatureId::InConclusion),
    ("that being said", FeatureId::ThatBeingSaid),
    ("arguably", FeatureId::Arguably),
    ("essentially", FeatureId::Essentially),
    ("fundamentally", FeatureId::Fundamentally),
    ("navigate", FeatureId::Navigate),
    ("landscape", FeatureId::Landscape),
    ("robust", FeatureId::Robust),
];

pub const HEDGING_WORDS: [&str; 5] = ["might", "could", "possibly", "perhaps", "maybe"];
pub const APOLOGETIC_WORDS: [&str; 2] = ["apologize", "sorry"];
pub const FORMAL_WORDS: [&str; 5] = ["furthermore", "moreover", "consequently", "nevertheless", "thereby"];

struct LexicalMatcher {
    automaton: AhoCorasick,
    targets: Vec<FeatureId>,
}

fn lexical_matcher() -> &'static LexicalMatcher {
    static MATCHER: OnceLock<LexicalMatcher> = OnceLock::new();
    MATCHER.get_or_init(|| {
        let mut patterns: Vec<&str> = Vec::new();
        let mut targets = Vec::new();
        for (p, id) in DISCOURSE {
            patterns.push(p);
            targets.push(id);
        }
        for (words, id) in [
            (&HEDGING_WORDS[..], FeatureId::Hedging),
            (&APOLOGETIC_WORDS[..], FeatureId::Apologetic),
            (&FORMAL_WORDS[..], FeatureId::Formal),
        ] {
            for w in words {
                patterns.push(w);
                targets.push(id);
            }
        }
        let automaton = AhoCorasickBuilder::new()
            .ascii_case_insensitive(true)
            .match_kind(MatchKind::Standard)
            .build(&patterns)
            .expect("static patterns compile");
        LexicalMatcher { automaton, targets }
    })
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn word_bounded(text: &str, start: usize, end: usize) -> bool {
    let before_ok = text[..start].chars().next_back().is_none_or(|c| !is_word_char(c));
    let after_ok = text[end..].chars().next().is_none_or(|c| !is_word_char(c));
    before_ok && after_ok
}

fn count_lexical(text: &str, counts: &mut FeatureCounts) {
    let matcher = lexical_matcher();
    for m in matcher.automaton.find_overlapping_iter(text) {
        if word_bounded(text, m.start(), m.end()) {
            counts[matcher.targets[m.pattern().as_usize()]] += 1;
        }
    }
}

fn count_punctuation(doc: &Document, counts: &mut FeatureCounts) {
    let mut depth = 0u64;
    let mut dot_run = 0u32;
    for c in doc.text.chars() {
        if c == '.' {
            dot_run += 1;
            if dot_run == 3 {
                counts[FeatureId::Ellipsis] += 1;
            }
            continue;
        }
        dot_run = 0;
        match c {
            '\u{2014}' => counts[FeatureId::EmDash] += 1,
            ';' => counts[FeatureId::Semicolon] += 1,
            '\u{2026}' => counts[FeatureId::Ellipsis] += 1,
            '(' => depth += 1,
            ')' if depth > 0 => {
                depth -= 1;
                counts[FeatureId::Parenthetical] += 1;
            }
            _ => {}
        }
    }
    for line in doc.line_texts() {
        for (i, _) in line.match_indices(':') {
            if line[i + 1..].chars().any(|c| !c.is_whitespace()) {
                counts[FeatureId::ColonMid] += 1;
            }
        }
    }
}

/// Parses `  12. text` / `3) text` and returns the item number.
fn numbered_item(line: &str) -> Option<u64> {
    let body = line.trim_start();
    let digits = body.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 || digits > 9 {
        return None;
    }
    let rest = &body[digits..];
    let mut rest_chars = rest.chars();
    match (rest_chars.next(), rest_chars.next()) {
        (Some('.' | ')'), Some(' ' | '\t')) => body[..digits].parse().ok(),
        _ => None,
    }
}

fn is_bullet(line: &str) -> bool {
    let mut chars = line.trim_start().chars();
    matches!(
        (chars.next(), chars.next()),
        (Some('\u{2022}' | '-' | '*'), Some(' ' | '\t'))
    )
}

fn is_header(line: &str) -> bool {
    let hashes = line.bytes().take_while(|&b| b == b'#').count();
    (1..=6).contains(&hashes) && matches!(line.as_bytes().get(hashes), Some(b' ' | b'\t'))
}

fn count_structural(doc: &Document, counts: &mut FeatureCounts) {
    // Numbered items form a run while each next item (in document order)
    // continues the sequence by exactly one; runs of length >= 2 count.
    let mut run_len = 0u64;
    let mut prev: Option<u64> = None;
    let flush = |run_len: u64, counts: &mut FeatureCounts| {
        if run_len >= 2 {
            counts[FeatureId::NumberedList] += run_len;
        }
    };
    for line in doc.line_texts() {
        if let Some(n) = numbered_item(line) {
            if prev.is_some_and(|p| p.checked_add(1) == Some(n)) {
                run_len += 1;
            } else {
                flush(run_len, counts);
                run_len = 1;
            }
            prev = Some(n);
        }
        if is_bullet(line) {
            counts[FeatureId::BulletPoint] += 1;
        }
        if is_header(line) {
            counts[FeatureId::MarkdownHeader] += 1;
        }
    }
    flush(run_len, counts);
}

fn count_sentence_starts(doc: &Document, counts: &mut FeatureCounts) {
    for s in &doc.sentences {
        let id = match s.first_token.as_str() {
            "however" => FeatureId::HoweverStart,
            "certainly" => FeatureId::CertainlyStart,
            "absolutely" => FeatureId::AbsolutelyStart,
            _ => continue,
        };
        counts[id] += 1;
    }
}

/// Raw counts of all 24 features in one document.
pub fn count(doc: &Document) -> FeatureCounts {
    let mut counts = FeatureCounts::default();
    count_punctuation(doc, &mut counts);
    count_lexical(&doc.text, &mut counts);
    count_sentence_starts(doc, &mut counts);
    count_structural(doc, &mut counts);
    counts
}

/// Single-document feature vector.
pub fn extract(doc: &Document) -> FeatureVector {
    FeatureVector::from_counts(count(doc), doc.token_count as u64, 1)
}

/// Pools vectors by summing raw counts and tokens, then dividing.
pub fn aggregate<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>) -> Result<FeatureVector, FeatureError> {
    let mut counts = FeatureCounts::default();
    let mut tokens = 0u64;
    let mut docs = 0u64;
    for v in vectors {
        for (slot, c) in counts.0.iter_mut().zip(v.counts.0) {
            *slot += c;
        }
        tokens += v.token_count;
        docs += v.doc_count;
    }
    if docs == 0 {
        return Err(FeatureError::EmptySequence);
    }
    Ok(FeatureVector::from_counts(counts, tokens, docs))
}

/// Elementwise maximum of per-document frequencies.
pub fn max_over_docs(vectors: &[FeatureVector]) -> Result<PerFeature<f64>, FeatureError> {
    if vectors.is_empty() {
        return Err(FeatureError::EmptySequence);
    }
    Ok(PerFeature::from_fn(|id| {
        vectors.iter().map(|v| v.values[id]).fold(0.0, f64::max)
    }))
}

/// Fraction of vectors with a nonzero value for `id`.
pub fn doc_hit_rate(vectors: &[FeatureVector], id: FeatureId) -> Result<f64, FeatureError> {
    if vectors.is_empty() {
        return Err(FeatureError::EmptySequence);
    }
    let hits = vectors.iter().filter(|v| v.values[id] > 0.0).count();
    Ok(hits as f64 / vectors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts_of(text: &str) -> FeatureCounts {
        count(&Document::new("t", text))
    }

    fn nonzero(c: &FeatureCounts) -> Vec<(FeatureId, u64)> {
        c.iter().filter(|(_, &v)| v > 0).map(|(id, &v)| (id, v)).collect()
    }

    #[test]
    fn taxonomy_shape() {
        assert_eq!(FeatureId::ALL.len(), 24);
        let sizes: Vec<usize> = Category::ALL.iter().map(|c| c.features().count()).collect();
        assert_eq!(sizes, vec![5, 10, 3, 3, 3]);
        for id in FeatureId::ALL {
            assert_eq!(FeatureId::from_name(id.name()), Some(id));
        }
    }

    #[test]
    fn hedged_fixture() {
        let doc = Document::new("t", "I might go \u{2014} perhaps tomorrow; maybe not...");
        assert_eq!(doc.token_count, 8);
        let v = extract(&doc);
        assert_eq!(
            nonzero(&v.counts),
            vec![
                (FeatureId::EmDash, 1),
                (FeatureId::Semicolon, 1),
                (FeatureId::Ellipsis, 1),
                (FeatureId::Hedging, 3),
            ]
        );
        assert_eq!(v.values[FeatureId::Hedging], 3.0 * 1000.0 / 8.0);
        assert_eq!(v.values[FeatureId::EmDash], 125.0);
    }

    #[test]
    fn empty_document_is_all_zero() {
        let v = extract(&Document::new("e", ""));
        assert_eq!(v.token_count, 0);
        assert!(v.values.0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn structural_fixture() {
        let c = counts_of("## Title\n1. First\n2. Second\n- bullet");
        assert_eq!(
            nonzero(&c),
            vec![
                (FeatureId::NumberedList, 2),
                (FeatureId::BulletPoint, 1),
                (FeatureId::MarkdownHeader, 1),
            ]
        );
    }

    #[test]
    fn lone_numbered_line_counts_zero() {
        assert_eq!(counts_of("1. Alone here")[FeatureId::NumberedList], 0);
        assert_eq!(counts_of("3. a\n5. b")[FeatureId::NumberedList], 0);
        // 1,2 then restart 1,2,3
        assert_eq!(counts_of("1. a\n2. b\n\ntext\n1) c\n2) d\n3) e")[FeatureId::NumberedList], 5);
        // indentation and intervening prose keep the run alive
        assert_eq!(counts_of("1. a\n   detail\n2. b")[FeatureId::NumberedList], 2);
        assert_eq!(counts_of("1.5 million\n2.5 million")[FeatureId::NumberedList], 0);
    }

    #[test]
    fn bullets() {
        assert_eq!(counts_of("- a\n* b\n\u{2022} c\n  - d")[FeatureId::BulletPoint], 4);
        assert_eq!(counts_of("-5 degrees\n---\n**bold**\n-x")[FeatureId::BulletPoint], 0);
    }

    #[test]
    fn headers() {
        assert_eq!(counts_of("# a\n###### b\n####### c\n#tag\n ## indented")[FeatureId::MarkdownHeader], 2);
    }

    #[test]
    fn em_dash_only_unicode() {
        let c = counts_of("a -- b \u{2013} c \u{2014} d");
        assert_eq!(c[FeatureId::EmDash], 1);
    }

    #[test]
    fn colon_mid_sentence() {
        let c = counts_of("Note: this\nList:\n  \nRatio 3:1 :");
        assert_eq!(c[FeatureId::ColonMid], 2);
    }

    #[test]
    fn ellipsis_runs() {
        let c = counts_of("wait... no.... yes.. and\u{2026} ok");
        assert_eq!(c[FeatureId::Ellipsis], 3);
    }

    #[test]
    fn parentheses_matched_only() {
        assert_eq!(counts_of("(a (b) c) d) (e")[FeatureId::Parenthetical], 2);
        assert_eq!(counts_of(") (")[FeatureId::Parenthetical], 0);
    }

    #[test]
    fn discourse_word_boundaries() {
        let c = counts_of(
            "Let us Delve Into it. navigating the landscape_x; Navigate! robustness is ROBUST. \
             In  conclusion and In conclusion, it\u{2019}s worth noting that. That being said",
        );
        assert_eq!(c[FeatureId::DelveInto], 1);
        assert_eq!(c[FeatureId::Navigate], 1);
        assert_eq!(c[FeatureId::Landscape], 0);
        assert_eq!(c[FeatureId::Robust], 1);
        assert_eq!(c[FeatureId::InConclusion], 1);
        assert_eq!(c[FeatureId::WorthNoting], 1);
        assert_eq!(c[FeatureId::ThatBeingSaid], 1);
    }

    #[test]
    fn tonal_lists() {
        let c = counts_of("Sorry, I apologize. Moreover it could, MIGHT; couldn't mightily thereby");
        assert_eq!(c[FeatureId::Apologetic], 2);
        assert_eq!(c[FeatureId::Formal], 2);
        // no inflections: "couldn't" and "mightily" are not hedges
        assert_eq!(c[FeatureId::Hedging], 2);
    }

    #[test]
    fn sentence_starts() {
        let c = counts_of("However, it works. Certainly: yes. Absolutely. however lowercase start. Not however.");
        assert_eq!(c[FeatureId::HoweverStart], 1);
        assert_eq!(c[FeatureId::CertainlyStart], 1);
        assert_eq!(c[FeatureId::AbsolutelyStart], 1);
    }

    #[test]
    fn aggregate_pools_counts() {
        let a = extract(&Document::new("a", "x \u{2014} \u{2014} y"));
        let b = extract(&Document::new("b", "x y z w"));
        let pooled = aggregate([&a, &b]).unwrap();
        assert_eq!(pooled.doc_count, 2);
        assert_eq!(pooled.values[FeatureId::EmDash], (a.values[FeatureId::EmDash] + b.values[FeatureId::EmDash]) / 2.0);
        assert_eq!(aggregate([&a]).unwrap(), a);
        assert_eq!(aggregate(std::iter::empty()), Err(FeatureError::EmptySequence));
    }

    #[test]
    fn max_and_hit_rate() {
        let docs: Vec<FeatureVector> = [0u64, 3, 1]
            .iter()
            .map(|&n| {
                let mut c = FeatureCounts::default();
                c[FeatureId::Semicolon] = n;
                FeatureVector::from_counts(c, 1000, 1)
            })
            .collect();
        assert_eq!(max_over_docs(&docs).unwrap()[FeatureId::Semicolon], 3.0);
        assert_eq!(doc_hit_rate(&docs, FeatureId::Semicolon).unwrap(), 2.0 / 3.0);
        assert_eq!(doc_hit_rate(&docs, FeatureId::EmDash).unwrap(), 0.0);
        assert!(max_over_docs(&[]).is_err());
    }

    #[test]
    fn per_feature_serde_requires_all_keys() {
        let v = PerFeature::from_fn(|id| id.index() as f64 * 0.5);
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with("{\"em_dash\":0.0,\"semicolon\":0.5"));
        let back: PerFeature<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        let broken = json.replace("\"robust\"", "\"robustness\"");
        assert!(serde_json::from_str::<PerFeature<f64>>(&broken).is_err());
        let mut obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&json).unwrap();
        obj.remove("formal");
        let err = serde_json::from_value::<PerFeature<f64>>(serde_json::Value::Object(obj)).unwrap_err();
        assert!(err.to_string().contains("incomplete"));
    }
}
