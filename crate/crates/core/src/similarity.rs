//! Cosine similarity matrices and the summaries drawn from them.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::sig9;
use crate::vectorize::DocumentEmbeddingSet;

/// Rows per parallel work unit.
const ROW_BLOCK: usize = 16;

/// `u·v / (‖u‖‖v‖)`, or 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(cosine_with_norms(u, norm(u), v, norm(v)))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
fn cosine_with_norms(u: &[f64], nu: f64, v: &[f64], nv: f64) -> f64 {
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    dot(u, v) / (nu * nv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Square,
    Cross,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    values: Vec<f64>,
    kind: MatrixKind,
}

impl SimilarityMatrix {
    /// Wraps precomputed scores (row-major), checking the layout invariants.
    pub fn from_values(
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        values: Vec<f64>,
        kind: MatrixKind,
    ) -> Result<Self> {
        if values.len() != row_ids.len() * col_ids.len() {
            return Err(Error::invalid(format!(
                "{} values for a {}x{} matrix",
                values.len(),
                row_ids.len(),
                col_ids.len()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("similarity scores must be finite"));
        }
        let m = Self {
            row_ids,
            col_ids,
            values,
            kind,
        };
        if kind == MatrixKind::Square {
            if m.row_ids != m.col_ids {
                return Err(Error::invalid("square matrix needs identical row and column ids"));
            }
            let n = m.rows();
            for i in 0..n {
                let d = m.get(i, i);
                if d != 0.0 && (d - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!("diagonal entry {i} is {d}")));
                }
                for j in i + 1..n {
                    if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 {
                        return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols() + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols()..(row + 1) * self.cols()]
    }

    /// Scores for the default mean policy of this matrix kind: strict upper
    /// triangle for square matrices, every cell otherwise. Row-major order.
    pub fn sample(&self) -> Vec<f64> {
        match self.kind {
            MatrixKind::Square => (0..self.rows())
                .flat_map(|i| self.row(i)[i + 1..].iter().copied())
                .collect(),
            MatrixKind::Cross => self.values.clone(),
        }
    }

    /// Matrix CSV: an empty corner cell then column ids; each row is its id
    /// followed by scores with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for id in &self.col_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (i, id) in self.row_ids.iter().enumerate() {
            out.push_str(&csv_field(id));
            for &x in self.row(i) {
                out.push(',');
                out.push_str(&sig9(x));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Parses the CSV layout written by [`SimilarityMatrix::to_csv`]. The
    /// matrix is square when row and column ids coincide.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
        let mut header_fields = split_csv(header);
        if header_fields.is_empty() || !header_fields.remove(0).is_empty() {
            return Err(Error::parse(1, "header must start with an empty cell"));
        }
        let col_ids = header_fields;
        let mut row_ids = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = split_csv(line);
            if fields.len() != col_ids.len() + 1 {
                return Err(Error::parse(
                    lineno,
                    format!("expected {} fields, found {}", col_ids.len() + 1, fields.len()),
                ));
            }
            row_ids.push(fields.remove(0));
            for f in fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("non-numeric score `{f}`")))?;
                values.push(v);
            }
        }
        let kind = if row_ids == col_ids {
            MatrixKind::Square
        } else {
            MatrixKind::Cross
        };
        Self::from_values(row_ids, col_ids, values, kind)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn split_csv(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => fields.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    fields.push(cur);
    fields
}

/// Builds a square matrix over `rows` when `cols` is `None`, otherwise the
/// rows x cols cross matrix. Computed in parallel over row blocks; every
/// cell uses the same sequential dot product, so the result does not depend
/// on scheduling.
pub fn similarity_matrix(
    rows: &DocumentEmbeddingSet,
    cols: Option<&DocumentEmbeddingSet>,
) -> Result<SimilarityMatrix> {
    build(rows, cols, true)
}

/// Single-threaded variant of [`similarity_matrix`].
pub fn similarity_matrix_sequential(
    rows: &DocumentEmbeddingSet,
    cols: Option<&DocumentEmbeddingSet>,
) -> Result<SimilarityMatrix> {
    build(rows, cols, false)
}

fn build(
    rows: &DocumentEmbeddingSet,
    cols: Option<&DocumentEmbeddingSet>,
    parallel: bool,
) -> Result<SimilarityMatrix> {
    if rows.is_empty() || cols.is_some_and(|c| c.is_empty()) {
        return Err(Error::invalid("cannot build a similarity matrix from an empty set"));
    }
    if let Some(c) = cols {
        if c.dim() != rows.dim() {
            return Err(Error::DimensionMismatch {
                expected: rows.dim(),
                found: c.dim(),
            });
        }
    }
    let square = cols.is_none();
    let col_set = cols.unwrap_or(rows);
    let row_vecs = rows.vectors();
    let col_vecs = col_set.vectors();
    let row_norms: Vec<f64> = row_vecs.iter().map(|v| norm(v)).collect();
    let col_norms: Vec<f64> = col_vecs.iter().map(|v| norm(v)).collect();
    let n_cols = col_vecs.len();

    let mut values = vec![0.0; row_vecs.len() * n_cols];
    let fill_block = |(block, out): (usize, &mut [f64])| {
        for (offset, row_out) in out.chunks_mut(n_cols).enumerate() {
            let i = block * ROW_BLOCK + offset;
            // Square: only j >= i here; the lower triangle is mirrored below.
            let start = if square { i } else { 0 };
            for j in start..n_cols {
                row_out[j] = cosine_with_norms(&row_vecs[i], row_norms[i], &col_vecs[j], col_norms[j]);
            }
        }
    };
    if parallel {
        values
            .par_chunks_mut(ROW_BLOCK * n_cols)
            .enumerate()
            .for_each(fill_block);
    } else {
        values
            .chunks_mut(ROW_BLOCK * n_cols)
            .enumerate()
            .for_each(fill_block);
    }
    if square {
        for i in 0..n_cols {
            for j in 0..i {
                values[i * n_cols + j] = values[j * n_cols + i];
            }
        }
    }

    Ok(SimilarityMatrix {
        row_ids: rows.ids().to_vec(),
        col_ids: col_set.ids().to_vec(),
        values,
        kind: if square {
            MatrixKind::Square
        } else {
            MatrixKind::Cross
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanPolicy {
    /// Strict upper triangle; square matrices only.
    UpperTriangleExclDiag,
    /// Every cell, including the diagonal of a square matrix.
    AllCells,
}

impl MeanPolicy {
    pub fn default_for(kind: MatrixKind) -> Self {
        match kind {
            MatrixKind::Square => MeanPolicy::UpperTriangleExclDiag,
            MatrixKind::Cross => MeanPolicy::AllCells,
        }
    }
}

pub fn mean_score(m: &SimilarityMatrix, policy: MeanPolicy) -> Result<f64> {
    match (policy, m.kind) {
        (MeanPolicy::UpperTriangleExclDiag, MatrixKind::Square) => {
            if m.rows() < 2 {
                return Err(Error::invalid("square mean needs at least two documents"));
            }
            let sample = m.sample();
            Ok(sample.iter().sum::<f64>() / sample.len() as f64)
        }
        (MeanPolicy::AllCells, _) => Ok(m.values.iter().sum::<f64>() / m.values.len() as f64),
        (policy, kind) => Err(Error::invalid(format!(
            "mean policy {policy:?} does not apply to a {kind:?} matrix"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub row_id: String,
    pub col_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Highest,
    Lowest,
}

/// Restricts candidate pairs by the collection (corpus) of each document.
///
/// The rows' collection is that of the first row id and the columns'
/// collection that of the last column id. In the combined layout (first
/// corpus then second corpus) these are the two corpora.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFilter {
    Any,
    WithinRowsCollection,
    WithinColsCollection,
    CrossCollections,
}

/// The `n` highest or lowest scoring pairs. Square matrices skip the
/// diagonal and report each unordered pair once (`row < col`). Ties are
/// broken by `(row_id, col_id)` ascending.
///
/// `collections` maps document ids to their collection; it is only consulted
/// for filters other than [`PairFilter::Any`].
pub fn extreme_pairs(
    m: &SimilarityMatrix,
    n: usize,
    direction: Direction,
    filter: PairFilter,
    collections: &HashMap<String, String>,
) -> Result<Vec<PairScore>> {
    if n == 0 {
        return Err(Error::invalid("requested zero pairs"));
    }
    let lookup = |id: &str| -> Result<&str> {
        collections
            .get(id)
            .map(String::as_str)
            .ok_or_else(|| Error::invalid(format!("no collection known for `{id}`")))
    };
    let (row_coll, col_coll) = match filter {
        PairFilter::Any => (None, None),
        _ => (
            Some(lookup(&m.row_ids[0])?),
            Some(lookup(m.col_ids.last().expect("non-empty matrix"))?),
        ),
    };

    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..m.rows() {
        let start = if m.kind == MatrixKind::Square { i + 1 } else { 0 };
        for j in start..m.cols() {
            let keep = match filter {
                PairFilter::Any => true,
                PairFilter::WithinRowsCollection => {
                    lookup(&m.row_ids[i])? == row_coll.unwrap()
                        && lookup(&m.col_ids[j])? == row_coll.unwrap()
                }
                PairFilter::WithinColsCollection => {
                    lookup(&m.row_ids[i])? == col_coll.unwrap()
                        && lookup(&m.col_ids[j])? == col_coll.unwrap()
                }
                PairFilter::CrossCollections => lookup(&m.row_ids[i])? != lookup(&m.col_ids[j])?,
            };
            if keep {
                candidates.push((i, j, m.get(i, j)));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::invalid(format!("filter {filter:?} leaves no candidate pairs")));
    }

    let by_ids = |a: &(usize, usize, f64), b: &(usize, usize, f64)| {
        (&m.row_ids[a.0], &m.col_ids[a.1]).cmp(&(&m.row_ids[b.0], &m.col_ids[b.1]))
    };
    candidates.sort_by(|a, b| {
        let by_score = match direction {
            Direction::Highest => b.2.partial_cmp(&a.2),
            Direction::Lowest => a.2.partial_cmp(&b.2),
        }
        .unwrap_or(Ordering::Equal);
        by_score.then_with(|| by_ids(a, b))
    });

    Ok(candidates
        .into_iter()
        .take(n)
        .map(|(i, j, score)| PairScore {
            row_id: m.row_ids[i].clone(),
            col_id: m.col_ids[j].clone(),
            score,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::vectorize::Method;

    fn set(vectors: Vec<Vec<f64>>) -> DocumentEmbeddingSet {
        let dim = vectors[0].len();
        let ids = (1..=vectors.len()).map(|i| format!("doc{i}")).collect();
        DocumentEmbeddingSet::new(Method::External, dim, ids, vectors).unwrap()
    }

    fn square(values: Vec<f64>, n: usize) -> SimilarityMatrix {
        let ids: Vec<String> = (1..=n).map(|i| format!("doc{i}")).collect();
        SimilarityMatrix::from_values(ids.clone(), ids, values, MatrixKind::Square).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[2.0, 0.0], &[4.0, 0.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn layouts() {
        let rows = set(vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0]]);
        let cols = set(vec![vec![0.0, 1.0], vec![3.0, 0.0]]);
        let sq = similarity_matrix(&rows, None).unwrap();
        assert_eq!((sq.rows(), sq.cols(), sq.kind()), (3, 3, MatrixKind::Square));
        assert_eq!(sq.get(2, 2), 0.0);
        assert_eq!(sq.get(0, 0), 1.0);
        let cross = similarity_matrix(&rows, Some(&cols)).unwrap();
        assert_eq!((cross.rows(), cross.cols(), cross.kind()), (3, 2, MatrixKind::Cross));
        assert_eq!(cross.get(0, 1), 1.0);

        let wrong = set(vec![vec![1.0, 0.0, 0.0]]);
        assert!(similarity_matrix(&rows, Some(&wrong)).is_err());
    }

    #[test]
    fn identical_vectors_score_one() {
        let rows = set(vec![vec![0.3, -0.2, 0.9]; 6]);
        let m = similarity_matrix(&rows, None).unwrap();
        assert!(m.values().iter().all(|&x| (x - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn means() {
        assert_eq!(mean_score(&square(vec![1.0, 0.5, 0.5, 1.0], 2), MeanPolicy::UpperTriangleExclDiag).unwrap(), 0.5);
        let cross = SimilarityMatrix::from_values(
            vec!["r1".into(), "r2".into()],
            vec!["c1".into(), "c2".into()],
            vec![0.2, 0.4, 0.6, 0.8],
            MatrixKind::Cross,
        )
        .unwrap();
        assert_abs_diff_eq!(mean_score(&cross, MeanPolicy::AllCells).unwrap(), 0.5, epsilon = 1e-15);
        assert!(mean_score(&cross, MeanPolicy::UpperTriangleExclDiag).is_err());
        let constant = SimilarityMatrix::from_values(
            vec!["r".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.25; 3],
            MatrixKind::Cross,
        )
        .unwrap();
        assert_eq!(mean_score(&constant, MeanPolicy::AllCells).unwrap(), 0.25);
        assert!(mean_score(&square(vec![1.0], 1), MeanPolicy::UpperTriangleExclDiag).is_err());
        // Diagonal included: (1 + 0.5 + 0.5 + 1) / 4.
        assert_eq!(mean_score(&square(vec![1.0, 0.5, 0.5, 1.0], 2), MeanPolicy::AllCells).unwrap(), 0.75);
    }

    #[test]
    fn extreme_pair_examples() {
        let m = square(vec![1.0, 0.9, 0.1, 0.9, 1.0, 0.5, 0.1, 0.5, 1.0], 3);
        let none = HashMap::new();
        let hi = extreme_pairs(&m, 1, Direction::Highest, PairFilter::Any, &none).unwrap();
        assert_eq!(hi, [PairScore { row_id: "doc1".into(), col_id: "doc2".into(), score: 0.9 }]);
        let lo = extreme_pairs(&m, 1, Direction::Lowest, PairFilter::Any, &none).unwrap();
        assert_eq!(lo, [PairScore { row_id: "doc1".into(), col_id: "doc3".into(), score: 0.1 }]);
        assert!(extreme_pairs(&m, 0, Direction::Lowest, PairFilter::Any, &none).is_err());
        let all = extreme_pairs(&m, 10, Direction::Highest, PairFilter::Any, &none).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn extreme_pair_filters_and_ties() {
        let m = square(vec![1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0], 3);
        let colls: HashMap<String, String> = [("doc1", "a"), ("doc2", "a"), ("doc3", "b")]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let tie = extreme_pairs(&m, 3, Direction::Highest, PairFilter::Any, &colls).unwrap();
        let ids: Vec<_> = tie.iter().map(|p| (p.row_id.as_str(), p.col_id.as_str())).collect();
        assert_eq!(ids, [("doc1", "doc2"), ("doc1", "doc3"), ("doc2", "doc3")]);
        let within = extreme_pairs(&m, 5, Direction::Highest, PairFilter::WithinRowsCollection, &colls).unwrap();
        assert_eq!(within.len(), 1);
        let cross = extreme_pairs(&m, 5, Direction::Highest, PairFilter::CrossCollections, &colls).unwrap();
        assert_eq!(cross.len(), 2);
        assert!(extreme_pairs(&m, 5, Direction::Highest, PairFilter::WithinColsCollection, &colls).is_err());
    }

    #[test]
    fn csv_layout() {
        let m = square(vec![1.0, 0.428046035063119, 0.428046035063119, 1.0], 2);
        assert_eq!(m.to_csv(), ",doc1,doc2\ndoc1,1,0.428046035\ndoc2,0.428046035,1\n");
        let back = SimilarityMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back.kind(), MatrixKind::Square);
        assert_eq!(back.get(0, 1), 0.428046035);
        assert_eq!(split_csv("\"a,b\",\"x\"\"y\",z"), ["a,b", "x\"y", "z"]);
    }

    fn vectors(n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn matrix_invariants(rows in vectors(9, 4), cols in vectors(5, 4), alpha in 0.01f64..100.0) {
            let r = set(rows);
            let c = set(cols);
            let sq = similarity_matrix(&r, None).unwrap();
            prop_assert_eq!(&sq, &similarity_matrix_sequential(&r, None).unwrap());
            for i in 0..sq.rows() {
                for j in 0..sq.cols() {
                    prop_assert_eq!(sq.get(i, j), sq.get(j, i));
                    prop_assert!(sq.get(i, j).abs() <= 1.0 + 1e-12);
                }
            }
            let scaled = similarity_matrix(&r.scaled(alpha), None).unwrap();
            for (a, b) in sq.values().iter().zip(scaled.values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            let cross = similarity_matrix(&r, Some(&c)).unwrap();
            prop_assert_eq!(&cross, &similarity_matrix_sequential(&r, Some(&c)).unwrap());
        }
    }
}
