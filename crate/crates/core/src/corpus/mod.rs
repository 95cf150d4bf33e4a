//! Corpus ingestion, preprocessing, balancing and exploratory statistics.
//!
//! Raw corpora are JSONL files with one `{"id","title","collection","text"}`
//! object per line. [`preprocess`] turns each [`RawDocument`] into a
//! [`Document`] holding its token sequence.

mod eda;
mod preprocess;
mod sample;

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eda::{eda, EdaReport};
pub use preprocess::{preprocess, tokenize, StopwordList};
pub use sample::{apply_exclusions, subsample_balanced, Balanced};

/// Anything carrying a corpus-unique identifier.
pub trait Keyed {
    fn id(&self) -> &str;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    pub id: String,
    pub title: String,
    pub collection: String,
    pub text: String,
}

impl Keyed for RawDocument {
    fn id(&self) -> &str {
        &self.id
    }
}

/// A preprocessed document. Title and collection are carried over from the
/// raw form so reports can label documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub collection: String,
    pub tokens: Vec<String>,
}

impl Keyed for Document {
    fn id(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCorpus {
    pub name: String,
    pub documents: Vec<RawDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<Document>,
}

impl RawCorpus {
    pub fn new(name: impl Into<String>, documents: Vec<RawDocument>) -> Result<Self> {
        check_unique(&documents)?;
        Ok(Self {
            name: name.into(),
            documents,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Preprocesses every document. Runs in parallel; output order matches input order.
    pub fn preprocess(&self, stopwords: &StopwordList) -> Corpus {
        let documents = self
            .documents
            .par_iter()
            .map(|raw| preprocess(raw, stopwords))
            .collect();
        Corpus {
            name: self.name.clone(),
            documents,
        }
    }

    /// Writes the corpus back out in the canonical JSONL layout.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for doc in &self.documents {
            out.push_str(&serde_json::to_string(doc).expect("raw document serializes"));
            out.push('\n');
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

impl Corpus {
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self> {
        check_unique(&documents)?;
        Ok(Self {
            name: name.into(),
            documents,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.id.as_str())
    }

    /// Ids of documents that have no tokens left after preprocessing.
    pub fn empty_documents(&self) -> Vec<&str> {
        self.documents
            .iter()
            .filter(|d| d.tokens.is_empty())
            .map(|d| d.id.as_str())
            .collect()
    }

    pub fn total_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// Concatenates two corpora, keeping `self` first. Ids must stay unique.
    pub fn concat(&self, other: &Corpus, name: impl Into<String>) -> Result<Corpus> {
        let documents = self
            .documents
            .iter()
            .chain(&other.documents)
            .cloned()
            .collect();
        Corpus::new(name, documents)
    }
}

fn check_unique<T: Keyed>(items: &[T]) -> Result<()> {
    let mut seen = HashSet::with_capacity(items.len());
    for item in items {
        if !seen.insert(item.id()) {
            return Err(Error::DuplicateId(item.id().to_owned()));
        }
    }
    Ok(())
}

/// Reads a corpus JSONL file. The corpus is named after the file stem.
///
/// Whitespace-only lines are skipped; an empty file yields an empty corpus.
pub fn parse_corpus_jsonl(path: &Path) -> Result<RawCorpus> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus_jsonl(BufReader::new(file), name)
}

pub fn read_corpus_jsonl<R: BufRead>(reader: R, name: impl Into<String>) -> Result<RawCorpus> {
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument =
            serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if doc.id.is_empty() {
            return Err(Error::parse(lineno, "empty id"));
        }
        if doc.text.is_empty() {
            return Err(Error::parse(lineno, format!("empty text for `{}`", doc.id)));
        }
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId(doc.id));
        }
        documents.push(doc);
    }
    Ok(RawCorpus {
        name: name.into(),
        documents,
    })
}

/// Default header for numbered sonnet dumps: a line holding only a Roman or
/// Arabic numeral, optionally followed by a period.
pub const NUMERAL_HEADER: &str = r"^\s*(?:[IVXLCDM]+|[0-9]+)\.?\s*$";

/// Splits a plain-text dump into one document per header-delimited block.
///
/// `header_pattern` is matched against each line. Text before the first
/// header is ignored. Documents are numbered in order of appearance as
/// `sonnet-1`, `sonnet-2`, ...
pub fn split_numbered_blocks(text: &str, header_pattern: &str) -> Result<Vec<RawDocument>> {
    let header = Regex::new(header_pattern)
        .map_err(|e| Error::invalid(format!("bad header pattern: {e}")))?;

    let mut blocks: Vec<(String, Vec<&str>)> = Vec::new();
    for line in text.lines() {
        if header.is_match(line) {
            blocks.push((line.trim().to_owned(), Vec::new()));
        } else if let Some((_, body)) = blocks.last_mut() {
            body.push(line);
        }
    }
    if blocks.is_empty() {
        return Err(Error::invalid("no header lines matched; zero blocks found"));
    }

    blocks
        .into_iter()
        .enumerate()
        .map(|(idx, (_, body))| {
            let n = idx + 1;
            let text = body
                .iter()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join("\n");
            if text.is_empty() {
                return Err(Error::invalid(format!("block {n} has no text")));
            }
            Ok(RawDocument {
                id: format!("sonnet-{n}"),
                title: format!("Sonnet {n}"),
                collection: "sonnets".to_owned(),
                text,
            })
        })
        .collect()
}
