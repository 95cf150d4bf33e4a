use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdaReport {
    pub corpus: String,
    pub documents: usize,
    pub total_words: usize,
    pub vocabulary_size: usize,
    /// `vocabulary_size / total_words`.
    pub lexical_diversity: f64,
    /// Most frequent tokens, count descending then token ascending.
    pub top_content_words: Vec<(String, usize)>,
}

pub fn eda(corpus: &Corpus, k: usize) -> Result<EdaReport> {
    if corpus.is_empty() {
        return Err(Error::invalid(format!("corpus `{}` is empty", corpus.name)));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tok in corpus.documents.iter().flat_map(|d| &d.tokens) {
        *counts.entry(tok.as_str()).or_default() += 1;
    }
    let total_words: usize = counts.values().sum();
    if total_words == 0 {
        return Err(Error::invalid(format!(
            "corpus `{}` has no tokens after preprocessing",
            corpus.name
        )));
    }
    let vocabulary_size = counts.len();

    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let top_content_words = ranked
        .into_iter()
        .take(k)
        .map(|(t, c)| (t.to_owned(), c))
        .collect();

    Ok(EdaReport {
        corpus: corpus.name.clone(),
        documents: corpus.len(),
        total_words,
        vocabulary_size,
        lexical_diversity: vocabulary_size as f64 / total_words as f64,
        top_content_words,
    })
}
