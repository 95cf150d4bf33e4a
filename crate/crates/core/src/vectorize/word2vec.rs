//! CBOW word-vector training with negative sampling.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use super::EmbeddingTable;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

const UNIGRAM_TABLE_SIZE: usize = 1_000_000;
const MIN_LR_FRACTION: f32 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WordVecParams {
    pub dim: usize,
    /// Maximum context radius; each center draws its radius from `1..=window`.
    pub window: usize,
    pub min_count: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f32,
    pub seed: u64,
    /// Single-threaded and bit-reproducible when set. Otherwise `workers`
    /// threads update the shared weights without locking.
    pub deterministic: bool,
    pub workers: usize,
}

impl Default for WordVecParams {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            min_count: 1,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.025,
            seed: 1,
            deterministic: true,
            workers: 4,
        }
    }
}

impl WordVecParams {
    fn validate(&self) -> Result<()> {
        let counts = [
            ("dim", self.dim),
            ("window", self.window),
            ("min_count", self.min_count),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("workers", self.workers),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("word-vector parameter `{name}` must be positive")));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::invalid("word-vector learning rate must be positive"));
        }
        Ok(())
    }
}

struct Vocab {
    words: Vec<String>,
    counts: Vec<usize>,
    index: HashMap<String, u32>,
}

impl Vocab {
    /// Tokens with `count >= min_count`, ordered by count descending then token.
    fn build(corpus: &Corpus, min_count: usize) -> Vocab {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for tok in corpus.documents.iter().flat_map(|d| &d.tokens) {
            *counts.entry(tok.as_str()).or_default() += 1;
        }
        let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        Vocab {
            words,
            counts: kept.into_iter().map(|(_, c)| c).collect(),
            index,
        }
    }

    /// Noise table with entries proportional to `count^0.75`.
    fn unigram_table(&self) -> Vec<u32> {
        let powered: Vec<f64> = self.counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        let total: f64 = powered.iter().sum();
        let last = self.words.len() - 1;
        let mut table = Vec::with_capacity(UNIGRAM_TABLE_SIZE);
        let mut word = 0;
        let mut cumulative = powered[0] / total;
        for slot in 0..UNIGRAM_TABLE_SIZE {
            table.push(word as u32);
            if (slot + 1) as f64 / UNIGRAM_TABLE_SIZE as f64 > cumulative && word < last {
                word += 1;
                cumulative += powered[word] / total;
            }
        }
        table
    }
}

/// Weight matrix shared between training threads. Reads and writes are
/// relaxed atomic loads and stores, so concurrent updates can overwrite each
/// other (lock-free "hogwild" updates) without undefined behaviour.
struct Weights {
    dim: usize,
    cells: Vec<AtomicU32>,
}

impl Weights {
    fn uniform(rows: usize, dim: usize, rng: &mut Xoshiro256StarStar) -> Self {
        let scale = 1.0 / dim as f32;
        let cells = (0..rows * dim)
            .map(|_| AtomicU32::new(((rng.gen::<f32>() - 0.5) * scale).to_bits()))
            .collect();
        Self { dim, cells }
    }

    #[inline]
    fn get(&self, row: u32, col: usize) -> f32 {
        f32::from_bits(self.cells[row as usize * self.dim + col].load(Ordering::Relaxed))
    }

    #[inline]
    fn add(&self, row: u32, col: usize, delta: f32) {
        let cell = &self.cells[row as usize * self.dim + col];
        let v = f32::from_bits(cell.load(Ordering::Relaxed)) + delta;
        cell.store(v.to_bits(), Ordering::Relaxed);
    }

    fn into_vec(self) -> Vec<f32> {
        self.cells
            .into_iter()
            .map(|c| f32::from_bits(c.into_inner()))
            .collect()
    }
}

struct Trainer<'a> {
    params: &'a WordVecParams,
    table: Vec<u32>,
    input: Weights,
    output: Weights,
    processed: AtomicUsize,
    total_updates: usize,
}

impl Trainer<'_> {
    fn learning_rate(&self) -> f32 {
        let done = self.processed.load(Ordering::Relaxed) as f32;
        let frac = 1.0 - done / (self.total_updates as f32 + 1.0);
        self.params.initial_lr * frac.max(MIN_LR_FRACTION)
    }

    fn train_sentences(&self, sentences: &[Vec<u32>], rng: &mut Xoshiro256StarStar) {
        let dim = self.params.dim;
        let mut hidden = vec![0.0f32; dim];
        let mut grad = vec![0.0f32; dim];
        let mut context = Vec::with_capacity(2 * self.params.window);
        for _ in 0..self.params.epochs {
            for sentence in sentences {
                for (pos, &center) in sentence.iter().enumerate() {
                    let alpha = self.learning_rate();
                    self.processed.fetch_add(1, Ordering::Relaxed);

                    let radius = rng.gen_range(1..=self.params.window);
                    let lo = pos.saturating_sub(radius);
                    let hi = (pos + radius).min(sentence.len() - 1);
                    context.clear();
                    context.extend((lo..=hi).filter(|&j| j != pos).map(|j| sentence[j]));
                    if context.is_empty() {
                        continue;
                    }

                    hidden.iter_mut().for_each(|h| *h = 0.0);
                    for &c in &context {
                        for (k, h) in hidden.iter_mut().enumerate() {
                            *h += self.input.get(c, k);
                        }
                    }
                    let inv = 1.0 / context.len() as f32;
                    hidden.iter_mut().for_each(|h| *h *= inv);
                    grad.iter_mut().for_each(|g| *g = 0.0);

                    for d in 0..=self.params.negatives {
                        let (target, label) = if d == 0 {
                            (center, 1.0)
                        } else {
                            let t = self.table[rng.gen_range(0..self.table.len() as u64) as usize];
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let dot: f32 = (0..dim).map(|k| hidden[k] * self.output.get(target, k)).sum();
                        let g = (label - sigmoid(dot)) * alpha;
                        for k in 0..dim {
                            grad[k] += g * self.output.get(target, k);
                            self.output.add(target, k, g * hidden[k]);
                        }
                    }
                    for &c in &context {
                        for (k, &g) in grad.iter().enumerate() {
                            self.input.add(c, k, g);
                        }
                    }
                }
            }
        }
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains CBOW vectors with negative sampling on the documents of `corpus`,
/// one document per sentence, and returns the input-side vectors.
pub fn train_word_vectors(corpus: &Corpus, params: &WordVecParams) -> Result<EmbeddingTable> {
    params.validate()?;
    let vocab = Vocab::build(corpus, params.min_count);
    if vocab.words.is_empty() {
        return Err(Error::invalid(format!(
            "no token occurs at least {} times; vocabulary is empty",
            params.min_count
        )));
    }
    let sentences: Vec<Vec<u32>> = corpus
        .documents
        .iter()
        .map(|d| d.tokens.iter().filter_map(|t| vocab.index.get(t).copied()).collect())
        .filter(|s: &Vec<u32>| !s.is_empty())
        .collect();
    let total_tokens: usize = sentences.iter().map(Vec::len).sum();

    let mut rng = Xoshiro256StarStar::seed_from_u64(params.seed);
    let n = vocab.words.len();
    let trainer = Trainer {
        params,
        table: vocab.unigram_table(),
        input: Weights::uniform(n, params.dim, &mut rng),
        output: Weights::uniform(n, params.dim, &mut rng),
        processed: AtomicUsize::new(0),
        total_updates: params.epochs * total_tokens,
    };

    if params.deterministic || params.workers == 1 {
        trainer.train_sentences(&sentences, &mut rng);
    } else {
        let chunk = sentences.len().div_ceil(params.workers).max(1);
        std::thread::scope(|scope| {
            for part in sentences.chunks(chunk) {
                rng.jump();
                let mut local = rng.clone();
                let trainer = &trainer;
                scope.spawn(move || trainer.train_sentences(part, &mut local));
            }
        });
    }

    Ok(EmbeddingTable::from_parts(
        params.dim,
        vocab.words,
        trainer.input.into_vec(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn corpus(docs: &[&str]) -> Corpus {
        let documents = docs
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                id: format!("d{i}"),
                title: String::new(),
                collection: String::new(),
                tokens: t.split_whitespace().map(str::to_owned).collect(),
            })
            .collect();
        Corpus::new("c", documents).unwrap()
    }

    #[test]
    fn vectors_have_requested_dimension() {
        let c = corpus(&["love time heart", "time love beauty thee"]);
        let table = train_word_vectors(&c, &WordVecParams::default()).unwrap();
        assert_eq!(table.dim(), 100);
        assert_eq!(table.len(), 5);
        assert!(table.iter().all(|(_, v)| v.len() == 100 && v.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn min_count_threshold() {
        let c = corpus(&["a a b", "a"]);
        let params = WordVecParams {
            min_count: 2,
            dim: 8,
            ..Default::default()
        };
        let table = train_word_vectors(&c, &params).unwrap();
        assert_eq!(table.words(), ["a"]);
    }

    #[test]
    fn empty_vocabulary_is_an_error() {
        let params = WordVecParams {
            min_count: 5,
            ..Default::default()
        };
        assert!(train_word_vectors(&corpus(&["a b"]), &params).is_err());
        assert!(train_word_vectors(&corpus(&[""]), &WordVecParams::default()).is_err());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let c = corpus(&["a b"]);
        for params in [
            WordVecParams { dim: 0, ..Default::default() },
            WordVecParams { window: 0, ..Default::default() },
            WordVecParams { initial_lr: 0.0, ..Default::default() },
        ] {
            assert!(train_word_vectors(&c, &params).is_err());
        }
    }

    #[test]
    fn deterministic_mode_is_bit_reproducible() {
        let c = corpus(&["a b c d e f", "b c d e", "f e d c b a a"]);
        let params = WordVecParams {
            dim: 16,
            seed: 42,
            ..Default::default()
        };
        let a = train_word_vectors(&c, &params).unwrap();
        let b = train_word_vectors(&c, &params).unwrap();
        assert_eq!(a, b);
        let other = train_word_vectors(&c, &WordVecParams { seed: 43, ..params }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn parallel_mode_trains() {
        let docs: Vec<String> = (0..40).map(|i| format!("w{} w{} w{} w{}", i % 7, i % 5, i % 3, i % 2)).collect();
        let refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let params = WordVecParams {
            dim: 12,
            deterministic: false,
            workers: 4,
            ..Default::default()
        };
        let table = train_word_vectors(&corpus(&refs), &params).unwrap();
        assert_eq!(table.dim(), 12);
        assert!(table.iter().all(|(_, v)| v.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn unigram_table_follows_powered_counts() {
        let c = corpus(&["a a a a a a a a a a a a a a a a b"]);
        let vocab = Vocab::build(&c, 1);
        let table = vocab.unigram_table();
        let share_b = table.iter().filter(|&&w| w == 1).count() as f64 / table.len() as f64;
        let expected = 1.0 / (16f64.powf(0.75) + 1.0);
        assert!((share_b - expected).abs() < 1e-4, "{share_b} vs {expected}");
    }
}
