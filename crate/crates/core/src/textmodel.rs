//! Deterministic text decomposition shared by every detector.
//!
//! A token is a maximal run of non-whitespace characters. Sentences are cut
//! by a small fixed rule set (no abbreviation dictionary), so re-extraction
//! over the same bytes always yields the same spans.

use std::borrow::Cow;

/// Byte range into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
    /// First whitespace-delimited run of the sentence, lowercased, with
    /// trailing `,` `.` `:` `;` removed.
    pub first_token: String,
}

/// A normalized text together with its token count, line spans and
/// sentence spans.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub token_count: usize,
    pub lines: Vec<Span>,
    pub sentences: Vec<SentenceSpan>,
}

impl Document {
    /// Normalizes `text` and decomposes it.
    pub fn new(id: impl Into<String>, text: &str) -> Self {
        let text = normalize(text).into_owned();
        let token_count = token_count(&text);
        let lines = split_lines(&text);
        let sentences = split_sentences(&text);
        Document {
            id: id.into(),
            text,
            token_count,
            lines,
            sentences,
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        tokenize(&self.text)
    }

    pub fn line_texts(&self) -> impl Iterator<Item = &str> + '_ {
        self.lines.iter().map(move |s| s.slice(&self.text))
    }
}

/// CRLF becomes LF and the right single quotation mark (U+2019) becomes an
/// ASCII apostrophe. Nothing else is touched.
pub fn normalize(text: &str) -> Cow<'_, str> {
    if !text.contains('\r') && !text.contains('\u{2019}') {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\r' if chars.peek() == Some(&'\n') => {}
            '\u{2019}' => out.push('\''),
            other => out.push(other),
        }
    }
    Cow::Owned(out)
}

/// Iterates tokens left to right.
pub fn tokenize(text: &str) -> std::str::SplitWhitespace<'_> {
    text.split_whitespace()
}

pub fn token_count(text: &str) -> usize {
    tokenize(text).count()
}

/// Splits on `\n`. Every span is an exact substring of `text`; the newline
/// itself belongs to no span.
pub fn split_lines(text: &str) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, b) in text.bytes().enumerate() {
        if b == b'\n' {
            spans.push(Span { start, end: i });
            start = i + 1;
        }
    }
    spans.push(Span {
        start,
        end: text.len(),
    });
    spans
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn opens_sentence(c: char) -> bool {
    c.is_uppercase() || matches!(c, '"' | '\'' | '(' | '[' | '\u{201C}' | '\u{2018}' | '\u{00AB}')
}

/// Whether a terminator ending just before `rest` closes the sentence.
fn boundary_after(rest: &str) -> bool {
    let mut chars = rest.chars();
    match chars.next() {
        None => return true,
        Some(c) if !c.is_whitespace() => return false,
        Some(_) => {}
    }
    match chars.find(|c| !c.is_whitespace()) {
        None => true,
        Some(c) => opens_sentence(c),
    }
}

fn first_token(sentence: &str) -> String {
    let raw = sentence.split_whitespace().next().unwrap_or("");
    raw.to_lowercase()
        .trim_end_matches([',', '.', ':', ';'])
        .to_string()
}

/// Sentence boundaries fall after `.`, `!` or `?` followed by whitespace and
/// then an uppercase letter, an opening quote or parenthesis, or the end of
/// the text. A blank line always ends the current sentence. Spans cover the
/// non-whitespace content and never start or end on whitespace.
pub fn split_sentences(text: &str) -> Vec<SentenceSpan> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    let mut last_end = 0;
    let mut newlines = 0u32;

    let close = |start: usize, end: usize, spans: &mut Vec<SentenceSpan>| {
        spans.push(SentenceSpan {
            start,
            end,
            first_token: first_token(&text[start..end]),
        });
    };

    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if c == '\n' {
                newlines += 1;
                if newlines >= 2 {
                    if let Some(start) = open.take() {
                        close(start, last_end, &mut spans);
                    }
                }
            }
            continue;
        }
        newlines = 0;
        if open.is_none() {
            open = Some(i);
        }
        let end = i + c.len_utf8();
        last_end = end;
        if is_terminator(c) && boundary_after(&text[end..]) {
            if let Some(start) = open.take() {
                close(start, end, &mut spans);
            }
        }
    }
    if let Some(start) = open {
        close(start, last_end, &mut spans);
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_count(text: &str) -> usize {
        let mut count = 0;
        let mut in_run = false;
        for c in text.chars() {
            if c.is_whitespace() {
                in_run = false;
            } else if !in_run {
                in_run = true;
                count += 1;
            }
        }
        count
    }

    #[test]
    fn token_counts() {
        assert_eq!(token_count(""), 0);
        assert_eq!(token_count("a b  c\n d"), 4);
    }

    #[test]
    fn prompt_token_count_golden() {
        // Frozen from a standalone split-and-count script.
        let prompt = "Write a detailed analysis of the benefits and drawbacks of remote work in modern society.";
        assert_eq!(token_count(prompt), 15);
        assert_eq!(brute_count(prompt), 15);
    }

    #[test]
    fn two_sentences() {
        let s = split_sentences("Hello world. However, wait!");
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].first_token, "hello");
        assert_eq!(s[1].first_token, "however");
        assert_eq!(&"Hello world. However, wait!"[s[1].start..s[1].end], "However, wait!");
    }

    #[test]
    fn lowercase_follower_blocks_split() {
        let s = split_sentences("e.g. value");
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].first_token, "e.g");
    }

    #[test]
    fn abbreviation_paragraph_hand_segmented() {
        let text = "I met Dr. Smith yesterday. He was kind! Was he busy? \"Yes,\" he said. (It rained.) the end";
        let got: Vec<&str> = split_sentences(text)
            .iter()
            .map(|s| &text[s.start..s.end])
            .collect();
        assert_eq!(
            got,
            vec![
                "I met Dr.",
                "Smith yesterday.",
                "He was kind!",
                "Was he busy?",
                "\"Yes,\" he said.",
                "(It rained.) the end",
            ]
        );
    }

    #[test]
    fn blank_line_terminates() {
        let text = "## Intro\n\nhowever we go on\n  \nnext part";
        let s = split_sentences(text);
        let firsts: Vec<&str> = s.iter().map(|s| s.first_token.as_str()).collect();
        assert_eq!(firsts, vec!["##", "however", "next"]);
    }

    #[test]
    fn single_newline_does_not_split() {
        let s = split_sentences("one line\nsecond line");
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("it\u{2019}s\r\nok"), "it's\nok");
        assert!(matches!(normalize("plain"), Cow::Borrowed(_)));
        // a lone CR is not a line ending
        assert_eq!(normalize("a\rb\u{2019}"), "a\rb'");
    }

    #[test]
    fn lines_map_back_to_text() {
        let d = Document::new("d", "a\r\nbb\n\nccc");
        let lines: Vec<&str> = d.line_texts().collect();
        assert_eq!(lines, vec!["a", "bb", "", "ccc"]);
    }

    #[test]
    fn empty_document() {
        let d = Document::new("e", "");
        assert_eq!(d.token_count, 0);
        assert!(d.sentences.is_empty());
    }

    proptest! {
        #[test]
        fn count_matches_brute(text in "[a-c .!?\n\t\u{a0}X\"]{0,80}") {
            prop_assert_eq!(token_count(&text), brute_count(&text));
        }

        #[test]
        fn concatenation_adds(a in "[a-z.!?]{1,10}( [a-z.!?]{1,10}){0,5}", b in "[A-Z.]{1,10}( [a-z]{1,10}){0,5}") {
            let joined = format!("{a} {b}");
            prop_assert_eq!(token_count(&joined), token_count(&a) + token_count(&b));
        }

        #[test]
        fn sentence_spans_partition_tokens(text in "[a-cA-C .!?\n\"(]{0,120}") {
            let spans = split_sentences(&text);
            let mut prev_end = 0;
            let mut inside: Vec<&str> = Vec::new();
            for s in &spans {
                prop_assert!(s.start < s.end);
                prop_assert!(s.start >= prev_end);
                prev_end = s.end;
                inside.extend(text[s.start..s.end].split_whitespace());
            }
            let all: Vec<&str> = text.split_whitespace().collect();
            prop_assert_eq!(inside, all);
            prop_assert_eq!(split_sentences(&text), spans);
        }
    }
}
