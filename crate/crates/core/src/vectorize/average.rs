use rayon::prelude::*;

use super::{DocumentEmbeddingSet, EmbeddingTable, Method};
use crate::corpus::{Corpus, Document};

/// Mean of the token vectors of `doc`.
///
/// Tokens missing from the table contribute a zero vector but still count
/// in the denominator. An empty document maps to the zero vector.
pub fn embed_average(table: &EmbeddingTable, doc: &Document) -> Vec<f64> {
    let mut sum = vec![0.0f64; table.dim()];
    if doc.tokens.is_empty() {
        return sum;
    }
    for tok in &doc.tokens {
        if let Some(v) = table.get(tok) {
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += x as f64;
            }
        }
    }
    let n = doc.tokens.len() as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    sum
}

pub fn embed_corpus_average(table: &EmbeddingTable, corpus: &Corpus) -> DocumentEmbeddingSet {
    let vectors = corpus
        .documents
        .par_iter()
        .map(|doc| embed_average(table, doc))
        .collect();
    let ids = corpus.ids().map(str::to_owned).collect();
    DocumentEmbeddingSet::new(Method::AvgWordvec, table.dim(), ids, vectors)
        .expect("corpus ids are unique and vectors share the table dimension")
}
