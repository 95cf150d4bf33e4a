use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DocumentEmbeddingSet, Method};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingLine<S, V> {
    id: S,
    vector: V,
}

/// Reads `{"id": ..., "vector": [...]}` lines produced by an external encoder.
pub fn load_external_embeddings(path: &Path) -> Result<DocumentEmbeddingSet> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_external_embeddings(BufReader::new(file))
}

pub fn read_external_embeddings<R: BufRead>(reader: R) -> Result<DocumentEmbeddingSet> {
    let mut ids = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: EmbeddingLine<String, Vec<f64>> =
            serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        if entry.vector.is_empty() {
            return Err(Error::parse(lineno, format!("empty vector for `{}`", entry.id)));
        }
        if let Some(first) = vectors.first() {
            if entry.vector.len() != first.len() {
                return Err(Error::parse(
                    lineno,
                    format!(
                        "dimension mismatch for `{}`: expected {}, found {}",
                        entry.id,
                        first.len(),
                        entry.vector.len()
                    ),
                ));
            }
        }
        if entry.vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::parse(lineno, format!("non-finite value for `{}`", entry.id)));
        }
        if !seen.insert(entry.id.clone()) {
            return Err(Error::parse(lineno, format!("duplicate id `{}`", entry.id)));
        }
        ids.push(entry.id);
        vectors.push(entry.vector);
    }
    let dim = vectors
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::invalid("embedding file contains no vectors"))?;
    DocumentEmbeddingSet::new(Method::External, dim, ids, vectors)
}

/// Writes a set in the same JSONL layout, one document per line, in set order.
pub fn write_embeddings_jsonl(set: &DocumentEmbeddingSet, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (id, vector) in set.iter() {
        let line = EmbeddingLine { id, vector };
        out.push_str(&serde_json::to_string(&line).expect("finite vectors serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<DocumentEmbeddingSet> {
        read_external_embeddings(text.as_bytes())
    }

    fn line(id: &str, dim: usize, fill: f64) -> String {
        let v: Vec<f64> = (0..dim).map(|i| fill + i as f64 * 1e-3).collect();
        serde_json::json!({"id": id, "vector": v}).to_string()
    }

    #[test]
    fn infers_dimension() {
        let set = read(&format!("{}\n{}\n", line("a", 768, 0.1), line("b", 768, 0.2))).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.dim(), 768);
        assert_eq!(set.method(), Method::External);
    }

    #[test]
    fn dimension_mismatch() {
        let err = read(&format!("{}\n{}\n", line("a", 768, 0.1), line("b", 512, 0.2))).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_finite_and_duplicates() {
        assert!(read(r#"{"id":"a","vector":[1.0, NaN]}"#).is_err());
        assert!(read(r#"{"id":"a","vector":[1e999]}"#).is_err());
        assert!(read("{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"a\",\"vector\":[2]}").is_err());
        assert!(read("").is_err());
    }

    #[test]
    fn write_then_read_is_exact() {
        let set = read(&format!("{}\n{}\n", line("a", 5, 0.1), line("b", 5, -1.0 / 3.0))).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        write_embeddings_jsonl(&set, &path).unwrap();
        assert_eq!(load_external_embeddings(&path).unwrap(), set);
    }
}
