use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use super::{Document, RawDocument};
use crate::error::{Error, Result};

const ENGLISH: &str = include_str!("../../data/stopwords_en.txt");

/// A set of lowercase words removed during preprocessing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled 179-word English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH)
    }

    /// One word per line; blank lines and lines starting with `#` are ignored.
    /// Entries are normalized the same way as document text.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(normalize)
            .collect();
        Self { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words.into_iter().map(|w| normalize(w.as_ref())).collect(),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

// NFC, lowercase, then NFC again since case mapping can denormalize.
fn normalize(text: &str) -> String {
    let lowered = text.nfc().collect::<String>().to_lowercase();
    lowered
        .nfc()
        .map(|c| if is_apostrophe(c) { '\'' } else { c })
        .collect()
}

/// Splits text into lowercase tokens without stopword removal.
///
/// A token is a maximal run of letters, digits and apostrophes with leading
/// and trailing apostrophes stripped. Runs without any letter are dropped.
/// Typographic apostrophes (U+2019) are folded to `'`.
pub fn tokenize(text: &str) -> Vec<String> {
    let text = normalize(text);
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|run| run.trim_matches('\''))
        .filter(|tok| tok.chars().any(char::is_alphabetic))
        .map(str::to_owned)
        .collect()
}

pub fn preprocess(raw: &RawDocument, stopwords: &StopwordList) -> Document {
    let tokens = tokenize(&raw.text)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect();
    Document {
        id: raw.id.clone(),
        title: raw.title.clone(),
        collection: raw.collection.clone(),
        tokens,
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn raw(text: &str) -> RawDocument {
        RawDocument {
            id: "d".into(),
            title: String::new(),
            collection: String::new(),
            text: text.into(),
        }
    }

    #[test]
    fn bundled_list_has_179_entries() {
        let list = StopwordList::english();
        assert_eq!(list.len(), 179);
        assert!(list.contains("i"));
        assert!(list.contains("don't"));
        assert!(!list.contains("thee"));
        assert!(!list.contains("shall"));
    }

    #[test]
    fn stopwords_are_removed_content_words_kept() {
        let stop = StopwordList::from_words(["i"]);
        let doc = preprocess(&raw("Shall I compare thee?"), &stop);
        assert_eq!(doc.tokens, ["shall", "compare", "thee"]);
    }

    #[test]
    fn internal_apostrophe_is_kept() {
        let doc = preprocess(&raw("CAN'T stop"), &StopwordList::empty());
        assert_eq!(doc.tokens, ["can't", "stop"]);
    }

    #[test]
    fn letterless_runs_are_dropped() {
        let doc = preprocess(&raw("1989 \u{2014}"), &StopwordList::empty());
        assert!(doc.tokens.is_empty());
    }

    #[test]
    fn edge_apostrophes_are_stripped() {
        assert_eq!(tokenize("'Cause 'em lov'st'"), ["cause", "em", "lov'st"]);
        assert_eq!(tokenize("can\u{2019}t"), ["can't"]);
        assert_eq!(tokenize("''"), Vec::<String>::new());
    }

    #[test]
    fn unicode_is_composed_and_lowercased() {
        // "E" + combining acute composes to a single letter.
        assert_eq!(tokenize("CAFE\u{301} Über"), ["café", "über"]);
    }

    #[test]
    fn comment_lines_in_stopword_file_are_ignored() {
        let list = StopwordList::parse("# header\nThe\n\nand\n");
        assert_eq!(list.iter().collect::<Vec<_>>(), ["and", "the"]);
    }

    proptest! {
        #[test]
        fn tokenization_is_idempotent(text in "[a-zA-Z0-9' ,.!?\u{2019}\u{e9}-]{0,80}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn no_stopword_survives(text in "[a-zA-Z' ]{0,80}") {
            let stop = StopwordList::english();
            let doc = preprocess(&raw(&text), &stop);
            for t in &doc.tokens {
                prop_assert!(!stop.contains(t));
                prop_assert_eq!(t.to_lowercase(), t.clone());
                prop_assert!(t.chars().any(char::is_alphabetic));
            }
        }
    }
}
