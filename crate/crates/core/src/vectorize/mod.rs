//! Document embeddings: TF-IDF, averaged word vectors, and externally
//! computed vectors read from JSONL.

mod average;
mod external;
mod table;
mod tfidf;
mod word2vec;
mod wvformat;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use average::{embed_average, embed_corpus_average};
pub use external::{load_external_embeddings, read_external_embeddings, write_embeddings_jsonl};
pub use table::EmbeddingTable;
pub use tfidf::{apply_tfidf, fit_tfidf, TfidfModel};
pub use word2vec::{train_word_vectors, WordVecParams};
pub use wvformat::{
    load_word_vectors_binary, load_word_vectors_text, read_word_vectors_binary,
    read_word_vectors_text, write_word_vectors_binary, write_word_vectors_text,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tfidf,
    #[serde(rename = "wordvec")]
    AvgWordvec,
    External,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Tfidf, Method::AvgWordvec, Method::External];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tfidf => "tfidf",
            Method::AvgWordvec => "wordvec",
            Method::External => "external",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(Method::Tfidf),
            "wordvec" | "avg_wordvec" => Ok(Method::AvgWordvec),
            "external" => Ok(Method::External),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// One vector per document, all produced by the same method. Order follows
/// the corpus the set was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DocumentEmbeddingSet {
    method: Method,
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl DocumentEmbeddingSet {
    pub fn new(method: Method, dim: usize, ids: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::invalid(format!(
                "{} ids but {} vectors",
                ids.len(),
                vectors.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Self {
            method,
            dim,
            ids,
            vectors,
            index,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.vectors[i].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .zip(&self.vectors)
            .map(|(id, v)| (id.as_str(), v.as_slice()))
    }

    /// Ids whose vector is entirely zero.
    pub fn zero_vector_ids(&self) -> Vec<&str> {
        self.iter()
            .filter(|(_, v)| v.iter().all(|&x| x == 0.0))
            .map(|(id, _)| id)
            .collect()
    }

    /// Builds a new set holding the given ids in the given order.
    pub fn select<'a, I>(&self, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out_ids = Vec::new();
        let mut out_vecs = Vec::new();
        for id in ids {
            let v = self.get(id).ok_or_else(|| {
                Error::invalid(format!("no {} embedding for document `{id}`", self.method))
            })?;
            out_ids.push(id.to_owned());
            out_vecs.push(v.to_vec());
        }
        Self::new(self.method, self.dim, out_ids, out_vecs)
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Multiplies every vector by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let vectors = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|x| x * alpha).collect())
            .collect();
        Self {
            vectors,
            ..self.clone()
        }
    }
}
