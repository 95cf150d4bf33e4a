use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::{DocumentEmbeddingSet, Method};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Fitted TF-IDF vocabulary and smoothed inverse document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    /// Token to column, columns assigned in lexicographic token order.
    vocabulary: HashMap<String, usize>,
    terms: Vec<String>,
    idf: Vec<f64>,
    n_docs: usize,
}

impl TfidfModel {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.column(term).map(|c| self.idf[c])
    }

    pub fn idf_values(&self) -> &[f64] {
        &self.idf
    }
}

/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
pub fn fit_tfidf(corpus: &Corpus) -> Result<TfidfModel> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot fit TF-IDF on an empty corpus"));
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in &corpus.documents {
        let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::invalid("cannot fit TF-IDF: corpus has no tokens"));
    }

    let mut terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    terms.sort_unstable();
    let n = corpus.len() as f64;
    let idf = terms
        .iter()
        .map(|t| ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0)
        .collect();
    let vocabulary = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    Ok(TfidfModel {
        vocabulary,
        terms,
        idf,
        n_docs: corpus.len(),
    })
}

/// Raw count times idf per term, then L2-normalized. Out-of-vocabulary
/// tokens are ignored; a document with no known terms gets the zero vector.
pub fn apply_tfidf(model: &TfidfModel, corpus: &Corpus) -> DocumentEmbeddingSet {
    let dim = model.len();
    let vectors: Vec<Vec<f64>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let mut v = vec![0.0; dim];
            for tok in &doc.tokens {
                if let Some(col) = model.column(tok) {
                    v[col] += 1.0;
                }
            }
            for (x, idf) in v.iter_mut().zip(&model.idf) {
                *x *= idf;
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect();
    let ids = corpus.ids().map(str::to_owned).collect();
    DocumentEmbeddingSet::new(Method::Tfidf, dim, ids, vectors)
        .expect("corpus ids are unique and vectors share the vocabulary size")
}
