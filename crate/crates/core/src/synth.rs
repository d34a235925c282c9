//! Synthetic corpora with known feature counts, for tests and benchmarks.
//!
//! Every marker the generator plants is recorded, so the returned counts
//! are what a correct extractor must find. Filler words never trigger a
//! feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{FeatureCounts, FeatureId};

const FILLER: [&str; 30] = [
    "alpha", "river", "stone", "table", "green", "quiet", "market", "window", "garden", "silver", "orange", "letter",
    "bridge", "cotton", "forest", "little", "winter", "yellow", "simple", "travel", "number", "people", "system",
    "water", "house", "light", "music", "north", "party", "story",
];

const MID_SENTENCE: [(FeatureId, &str); 18] = [
    (FeatureId::DelveInto, "delve into"),
    (FeatureId::WorthNoting, "it's worth noting"),
    (FeatureId::InConclusion, "in conclusion"),
    (FeatureId::ThatBeingSaid, "that being said"),
    (FeatureId::Arguably, "arguably"),
    (FeatureId::Essentially, "essentially"),
    (FeatureId::Fundamentally, "fundamentally"),
    (FeatureId::Navigate, "navigate"),
    (FeatureId::Landscape, "landscape"),
    (FeatureId::Robust, "robust"),
    (FeatureId::Hedging, "perhaps"),
    (FeatureId::Hedging, "might"),
    (FeatureId::Apologetic, "sorry"),
    (FeatureId::Formal, "moreover"),
    (FeatureId::Formal, "thereby"),
    (FeatureId::EmDash, "\u{2014}"),
    (FeatureId::Parenthetical, "(alpha river)"),
    (FeatureId::Ellipsis, "green..."),
];

/// Per-sentence and per-paragraph planting probabilities.
#[derive(Debug, Clone)]
pub struct Style {
    /// Probability of each [`MID_SENTENCE`] marker per sentence.
    pub marker: f64,
    pub semicolon: f64,
    pub colon: f64,
    pub however: f64,
    pub certainly: f64,
    pub absolutely: f64,
    pub header: f64,
    pub numbered: f64,
    pub bullets: f64,
    /// Multiplier applied to discourse markers and structural blocks.
    pub ai_boost: f64,
    pub target_tokens: (usize, usize),
}

impl Style {
    pub fn human() -> Self {
        Style {
            marker: 0.03,
            semicolon: 0.15,
            colon: 0.1,
            however: 0.05,
            certainly: 0.02,
            absolutely: 0.02,
            header: 0.08,
            numbered: 0.06,
            bullets: 0.06,
            ai_boost: 1.0,
            target_tokens: (250, 350),
        }
    }

    /// Heavier discourse markers and structure, as in assistant-style text.
    pub fn assistant() -> Self {
        Style {
            ai_boost: 6.0,
            certainly: 0.15,
            semicolon: 0.02,
            ..Style::human()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthDoc {
    pub text: String,
    pub counts: FeatureCounts,
    pub tokens: u64,
}

struct Builder<'a> {
    rng: ChaCha8Rng,
    style: &'a Style,
}

impl Builder<'_> {
    fn filler(&mut self) -> &'static str {
        FILLER[self.rng.random_range(0..FILLER.len())]
    }

    fn hit(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p.min(1.0)
    }

    fn words(&mut self, len: std::ops::Range<usize>) -> Vec<String> {
        let n = self.rng.random_range(len);
        (0..n).map(|_| self.filler().to_string()).collect()
    }

    fn sentence(&mut self, counts: &mut FeatureCounts) -> Vec<String> {
        let mut words = self.words(8..20);
        let boost = self.style.ai_boost;
        for (id, marker) in MID_SENTENCE {
            let p = if id.category() == crate::features::Category::Discourse {
                self.style.marker * boost
            } else {
                self.style.marker * 3.0
            };
            if self.hit(p) {
                let at = self.rng.random_range(1..words.len());
                words.insert(at, marker.to_string());
                counts[id] += 1;
            }
        }
        // decorate interior plain filler words only
        let last = words.len() - 1;
        if self.hit(self.style.semicolon) {
            let at = self.rng.random_range(1..last);
            if FILLER.contains(&words[at].as_str()) {
                words[at].push(';');
                counts[FeatureId::Semicolon] += 1;
            }
        }
        if self.hit(self.style.colon) {
            let at = self.rng.random_range(1..last);
            if FILLER.contains(&words[at].as_str()) {
                words[at].push(':');
                counts[FeatureId::ColonMid] += 1;
            }
        }
        let opener = if self.hit(self.style.however) {
            counts[FeatureId::HoweverStart] += 1;
            Some("However,")
        } else if self.hit(self.style.certainly) {
            counts[FeatureId::CertainlyStart] += 1;
            Some("Certainly,")
        } else if self.hit(self.style.absolutely) {
            counts[FeatureId::AbsolutelyStart] += 1;
            Some("Absolutely,")
        } else {
            None
        };
        match opener {
            Some(o) => words.insert(0, o.to_string()),
            None => {
                let first = &mut words[0];
                if let Some(c) = first.get_mut(0..1) {
                    c.make_ascii_uppercase();
                }
            }
        }
        words.last_mut().expect("non-empty sentence").push('.');
        words
    }

    fn doc(&mut self) -> SynthDoc {
        let mut counts = FeatureCounts::default();
        let target = self.rng.random_range(self.style.target_tokens.0..=self.style.target_tokens.1);
        let mut paragraphs: Vec<String> = Vec::new();
        let mut tokens = 0usize;
        let boost = self.style.ai_boost;
        while tokens < target {
            if self.hit(self.style.header * boost) {
                let mut w = self.words(1..4);
                w.insert(0, "##".into());
                tokens += w.len();
                paragraphs.push(w.join(" "));
                counts[FeatureId::MarkdownHeader] += 1;
            }
            if self.hit(self.style.numbered * boost) {
                let items = self.rng.random_range(2..6);
                let mut lines = Vec::new();
                for i in 1..=items {
                    let mut w = self.words(2..6);
                    w.insert(0, format!("{i}."));
                    tokens += w.len();
                    lines.push(w.join(" "));
                }
                counts[FeatureId::NumberedList] += items as u64;
                paragraphs.push(lines.join("\n"));
            }
            if self.hit(self.style.bullets * boost) {
                let items = self.rng.random_range(1..5);
                let mut lines = Vec::new();
                for _ in 0..items {
                    let mut w = self.words(2..6);
                    w.insert(0, "-".into());
                    tokens += w.len();
                    lines.push(w.join(" "));
                }
                counts[FeatureId::BulletPoint] += items as u64;
                paragraphs.push(lines.join("\n"));
            }
            let sentences = self.rng.random_range(2..6);
            let mut para = Vec::new();
            for _ in 0..sentences {
                let s = self.sentence(&mut counts);
                tokens += s.iter().map(|w| w.split_whitespace().count()).sum::<usize>();
                para.push(s.join(" "));
            }
            paragraphs.push(para.join(" "));
        }
        SynthDoc {
            text: paragraphs.join("\n\n"),
            counts,
            tokens: tokens as u64,
        }
    }
}

/// `n` documents drawn from one ChaCha stream of `seed`.
pub fn generate(n: usize, seed: u64, style: &Style) -> Vec<SynthDoc> {
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        style,
    };
    (0..n).map(|_| b.doc()).collect()
}
