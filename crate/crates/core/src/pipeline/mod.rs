//! End-to-end experiment: ingest and balance two corpora, embed them with
//! every available method, build the four similarity layouts, and test the
//! four hypotheses.
//!
//! Stages can run separately. `embed` caches the exact embedding sets and a
//! dataset manifest in the output directory; later stages rebuild matrices
//! from that cache, so their results match a full run bit for bit.

mod config;
mod figure;
mod report;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use config::{MeanPolicies, RunConfig};
pub use figure::{emit_bar_svg, render_bar_svg, FigureData};
pub use report::{
    emit_matrix_csv, emit_report_json, BalanceStrategy, Balancing, CorpusSummary, Decision,
    HypothesisEntry, HypothesisReport, HypothesisTest, MeanEntry, OmittedMethod, Provenance,
    ZeroVectorCount,
};

use crate::corpus::{
    apply_exclusions, eda, parse_corpus_jsonl, split_numbered_blocks, subsample_balanced, Corpus,
    EdaReport, RawCorpus, RawDocument, StopwordList, NUMERAL_HEADER,
};
use crate::error::{Error, Result, StageContext};
use crate::similarity::{
    extreme_pairs, mean_score, similarity_matrix, Direction, MatrixKind, MeanPolicy, PairFilter,
    PairScore, SimilarityMatrix,
};
use crate::stats::{
    mann_whitney_u, one_way_anova, tukey_hsd, wilcoxon_signed_rank, Alternative, GroupSample,
    TukeyResult,
};
use crate::vectorize::{
    apply_tfidf, embed_corpus_average, fit_tfidf, load_external_embeddings,
    load_word_vectors_binary, load_word_vectors_text, read_external_embeddings,
    train_word_vectors, write_embeddings_jsonl, write_word_vectors_text, DocumentEmbeddingSet,
    EmbeddingTable, Method,
};

const SONNETS: &str = "sonnets";
const SONGS: &str = "songs";
const MANIFEST_FILE: &str = "datasets.json";
const EXCLUDED_FILE: &str = "excluded_ids.txt";
const INDEX_FILE: &str = "embeddings_index.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    Sonnets,
    Songs,
    /// All documents of both corpora, sonnets first.
    Combined,
    /// Sonnet rows against song columns.
    Distinct,
}

impl Dataset {
    pub const ALL: [Dataset; 4] = [
        Dataset::Sonnets,
        Dataset::Songs,
        Dataset::Combined,
        Dataset::Distinct,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Sonnets => "sonnets",
            Dataset::Songs => "songs",
            Dataset::Combined => "combined",
            Dataset::Distinct => "distinct",
        }
    }
}

/// Reads a corpus file: numeral-headed blocks for `.txt`, JSONL otherwise.
pub fn load_raw_corpus(path: &Path, name: &str) -> Result<RawCorpus> {
    let mut raw = if path.extension().is_some_and(|e| e == "txt") {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RawCorpus::new(name, split_numbered_blocks(&text, NUMERAL_HEADER)?)?
    } else {
        parse_corpus_jsonl(path)?
    };
    raw.name = name.to_owned();
    Ok(raw)
}

/// Reads an id list: one id per line, blank and `#` lines ignored.
pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

/// Both corpora after balancing, before preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub sonnets: RawCorpus,
    pub songs: RawCorpus,
    pub input_sizes: (usize, usize),
    /// Dropped ids, sonnets first, each in original order.
    pub excluded: Vec<String>,
    pub balancing: Balancing,
}

impl Ingested {
    pub fn write(&self, out: &Path) -> Result<()> {
        ensure_dir(out)?;
        self.sonnets.write_jsonl(&out.join("corpus_sonnets.jsonl"))?;
        self.songs.write_jsonl(&out.join("corpus_songs.jsonl"))?;
        write_lines(&out.join(EXCLUDED_FILE), &self.excluded)
    }
}

/// Loads both corpora and balances them.
///
/// With an exclusion list, exactly the listed ids are dropped from
/// whichever corpus holds them. Otherwise each corpus larger than
/// `target_size` is subsampled to it; the songs use `seed` and the sonnets
/// `seed + 1`. Sizes that still differ are reported, not rejected.
pub fn ingest(cfg: &RunConfig) -> Result<Ingested> {
    let sonnets = load_raw_corpus(cfg.sonnets_path()?, SONNETS)?;
    let songs = load_raw_corpus(cfg.songs_path()?, SONGS)?;
    let input_sizes = (sonnets.len(), songs.len());
    let mut notes = Vec::new();

    let (strategy, kept_sonnets, kept_songs, excluded) = if let Some(path) = &cfg.exclude {
        let ids = read_id_list(path)?;
        let sonnet_ids: HashSet<&str> = sonnets.documents.iter().map(|d| d.id.as_str()).collect();
        let song_ids: HashSet<&str> = songs.documents.iter().map(|d| d.id.as_str()).collect();
        if let Some(unknown) = ids
            .iter()
            .find(|id| !sonnet_ids.contains(id.as_str()) && !song_ids.contains(id.as_str()))
        {
            return Err(Error::invalid(format!("excluded id `{unknown}` is in neither corpus")));
        }
        let (from_sonnets, from_songs): (Vec<String>, Vec<String>) =
            ids.into_iter().partition(|id| sonnet_ids.contains(id.as_str()));
        let a = apply_exclusions(&sonnets.documents, &from_sonnets)?;
        let b = apply_exclusions(&songs.documents, &from_songs)?;
        let excluded: Vec<String> = a.excluded.into_iter().chain(b.excluded).collect();
        (BalanceStrategy::ExclusionList, a.kept, b.kept, excluded)
    } else {
        let mut subsampled = false;
        let mut balance = |docs: Vec<RawDocument>, seed: u64, name: &str| -> Result<_> {
            if docs.len() > cfg.target_size {
                subsampled = true;
                let b = subsample_balanced(&docs, cfg.target_size, seed)?;
                Ok((b.kept, b.excluded))
            } else {
                if docs.len() < cfg.target_size {
                    notes.push(format!(
                        "{name}: {} documents, below target_size {}; subsampling skipped",
                        docs.len(),
                        cfg.target_size
                    ));
                }
                Ok((docs, Vec::new()))
            }
        };
        let (kept_sonnets, ex_sonnets) =
            balance(sonnets.documents.clone(), cfg.seed.wrapping_add(1), SONNETS)?;
        let (kept_songs, ex_songs) = balance(songs.documents.clone(), cfg.seed, SONGS)?;
        let strategy = if subsampled {
            BalanceStrategy::SeededSubsample
        } else {
            BalanceStrategy::None
        };
        let excluded: Vec<String> = ex_sonnets.into_iter().chain(ex_songs).collect();
        (strategy, kept_sonnets, kept_songs, excluded)
    };

    for (name, docs) in [(SONNETS, &kept_sonnets), (SONGS, &kept_songs)] {
        if docs.len() < 2 {
            return Err(Error::invalid(format!(
                "{name}: {} documents after balancing; at least 2 are needed",
                docs.len()
            )));
        }
    }
    let balanced = kept_sonnets.len() == kept_songs.len();
    if !balanced {
        notes.push(format!(
            "unbalanced corpora: {} sonnets vs {} songs",
            kept_sonnets.len(),
            kept_songs.len()
        ));
    }
    Ok(Ingested {
        sonnets: RawCorpus::new(SONNETS, kept_sonnets)?,
        songs: RawCorpus::new(SONGS, kept_songs)?,
        input_sizes,
        balancing: Balancing {
            strategy,
            target_size: cfg.target_size,
            balanced,
            excluded: excluded.len(),
            notes,
        },
        excluded,
    })
}

/// Document ids and corpus bookkeeping, enough to rebuild every layout from
/// cached embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub sonnet_ids: Vec<String>,
    pub song_ids: Vec<String>,
    pub corpora: Vec<CorpusSummary>,
    pub balancing: Balancing,
    pub excluded_ids: Vec<String>,
}

impl DatasetManifest {
    pub fn combined_ids(&self) -> impl Iterator<Item = &str> {
        self.sonnet_ids.iter().chain(&self.song_ids).map(String::as_str)
    }

    pub fn empty_documents(&self) -> Vec<String> {
        self.corpora
            .iter()
            .flat_map(|c| c.empty_documents.iter().cloned())
            .collect()
    }
}

/// Preprocessed corpora plus their combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Datasets {
    pub sonnets: Corpus,
    pub songs: Corpus,
    pub combined: Corpus,
    pub manifest: DatasetManifest,
}

pub fn load_stopwords(cfg: &RunConfig) -> Result<StopwordList> {
    match &cfg.stopwords {
        Some(path) => StopwordList::from_file(path),
        None => Ok(StopwordList::english()),
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Datasets> {
    let ingested = ingest(cfg).stage("ingest")?;
    prepare_from(cfg, &ingested)
}

pub fn prepare_from(cfg: &RunConfig, ingested: &Ingested) -> Result<Datasets> {
    let stopwords = load_stopwords(cfg).stage("preprocess")?;
    let sonnets = ingested.sonnets.preprocess(&stopwords);
    let songs = ingested.songs.preprocess(&stopwords);
    let combined = sonnets.concat(&songs, "combined").stage("preprocess")?;
    let summary = |c: &Corpus, input: usize| CorpusSummary {
        name: c.name.clone(),
        input_documents: input,
        kept_documents: c.len(),
        empty_documents: c.empty_documents().into_iter().map(str::to_owned).collect(),
    };
    let manifest = DatasetManifest {
        sonnet_ids: sonnets.ids().map(str::to_owned).collect(),
        song_ids: songs.ids().map(str::to_owned).collect(),
        corpora: vec![
            summary(&sonnets, ingested.input_sizes.0),
            summary(&songs, ingested.input_sizes.1),
        ],
        balancing: ingested.balancing.clone(),
        excluded_ids: ingested.excluded.clone(),
    };
    Ok(Datasets {
        sonnets,
        songs,
        combined,
        manifest,
    })
}

pub fn run_eda(cfg: &RunConfig, data: &Datasets) -> Result<Vec<EdaReport>> {
    [&data.sonnets, &data.songs]
        .into_iter()
        .map(|c| eda(c, cfg.top_words))
        .collect::<Result<_>>()
        .stage("eda")
}

pub fn write_eda(out: &Path, reports: &[EdaReport]) -> Result<()> {
    ensure_dir(out)?;
    for r in reports {
        write_json(&out.join(format!("eda_{}.json", r.corpus)), r)?;
    }
    Ok(())
}

/// Embedding sets over the combined corpus, one per available method.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub sets: BTreeMap<Method, DocumentEmbeddingSet>,
    pub omitted: Vec<OmittedMethod>,
    pub wordvec_source: String,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingIndex {
    embedding_key: String,
    methods: Vec<Method>,
    omitted: Vec<OmittedMethod>,
    wordvec_source: String,
}

/// Embeds every document of the combined corpus with the requested methods.
///
/// TF-IDF is fit and word vectors are trained on the combined corpus, so the
/// per-dataset sets are sub-selections of one embedding space and the
/// distinct layout is exactly the cross block of the combined one. A
/// configured pretrained table replaces training.
pub fn embed(
    cfg: &RunConfig,
    data: &Datasets,
    methods: &[Method],
) -> Result<(Embeddings, Option<EmbeddingTable>)> {
    let mut sets = BTreeMap::new();
    let mut omitted = Vec::new();
    let mut trained = None;
    let mut wordvec_source = String::from("not requested");
    for &method in methods {
        match method {
            Method::Tfidf => {
                let model = fit_tfidf(&data.combined).stage("embed/tfidf")?;
                sets.insert(method, apply_tfidf(&model, &data.combined));
            }
            Method::AvgWordvec => {
                let table = match &cfg.pretrained_vectors {
                    Some(path) => {
                        wordvec_source = format!("pretrained:{}", path.display());
                        let table = if path.extension().is_some_and(|e| e == "bin") {
                            load_word_vectors_binary(path)
                        } else {
                            load_word_vectors_text(path)
                        };
                        table.stage("embed/wordvec")?
                    }
                    None => {
                        wordvec_source = "trained:combined".into();
                        let t = train_word_vectors(&data.combined, &cfg.wordvec)
                            .stage("embed/wordvec")?;
                        trained = Some(t.clone());
                        t
                    }
                };
                sets.insert(method, embed_corpus_average(&table, &data.combined));
            }
            Method::External => match &cfg.external_embeddings {
                Some(path) => {
                    let set = load_external_embeddings(path)
                        .and_then(|s| s.select(data.combined.ids()))
                        .stage("embed/external")?;
                    sets.insert(method, set);
                }
                None => omitted.push(OmittedMethod {
                    method,
                    reason: "no external embedding file configured".into(),
                }),
            },
        }
    }
    Ok((
        Embeddings {
            sets,
            omitted,
            wordvec_source,
        },
        trained,
    ))
}

/// Caches embeddings and the manifest so later stages can skip embedding.
pub fn write_embedding_cache(
    cfg: &RunConfig,
    manifest: &DatasetManifest,
    emb: &Embeddings,
) -> Result<()> {
    let out = cfg.out.as_path();
    ensure_dir(out)?;
    write_json(&out.join(MANIFEST_FILE), manifest)?;
    for (method, set) in &emb.sets {
        write_embeddings_jsonl(set, &out.join(format!("embeddings_{method}.jsonl")))?;
    }
    let index = EmbeddingIndex {
        embedding_key: cfg.embedding_key(),
        methods: emb.sets.keys().copied().collect(),
        omitted: emb.omitted.clone(),
        wordvec_source: emb.wordvec_source.clone(),
    };
    write_json(&out.join(INDEX_FILE), &index)
}

/// Loads the cache written for `cfg`. Returns `None` when no cache exists or
/// it was written under different embedding settings.
pub fn load_embedding_cache(cfg: &RunConfig) -> Result<Option<(DatasetManifest, Embeddings)>> {
    let out = cfg.out.as_path();
    let index_path = out.join(INDEX_FILE);
    if !index_path.exists() {
        return Ok(None);
    }
    let index: EmbeddingIndex = read_json(&index_path)?;
    if index.embedding_key != cfg.embedding_key() {
        return Ok(None);
    }
    let manifest: DatasetManifest = read_json(&out.join(MANIFEST_FILE))?;
    let mut sets = BTreeMap::new();
    for method in index.methods {
        let path = out.join(format!("embeddings_{method}.jsonl"));
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let set = read_external_embeddings(std::io::BufReader::new(file))
            .and_then(|s| s.select(manifest.combined_ids()))
            .map_err(|e| Error::Stage {
                stage: format!("cache {}", path.display()),
                source: Box::new(e),
            })?;
        sets.insert(method, set.with_method(method));
    }
    Ok(Some((
        manifest,
        Embeddings {
            sets,
            omitted: index.omitted,
            wordvec_source: index.wordvec_source,
        },
    )))
}

/// Embeds from scratch and refreshes the cache, also writing trained word
/// vectors to `word_vectors.txt`.
pub fn embed_and_cache(cfg: &RunConfig, data: &Datasets) -> Result<Embeddings> {
    let (emb, trained) = embed(cfg, data, &Method::ALL)?;
    write_embedding_cache(cfg, &data.manifest, &emb).stage("embed")?;
    if let Some(table) = trained {
        write_word_vectors_text(&table, &cfg.out.join("word_vectors.txt")).stage("embed")?;
    }
    Ok(emb)
}

/// Cached embeddings when they match `cfg`, otherwise a fresh embedding run.
pub fn cached_or_embed(cfg: &RunConfig) -> Result<(DatasetManifest, Embeddings)> {
    if let Some(hit) = load_embedding_cache(cfg)? {
        return Ok(hit);
    }
    let data = prepare(cfg)?;
    let emb = embed_and_cache(cfg, &data)?;
    Ok((data.manifest, emb))
}

/// The four layouts for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    pub sonnets: SimilarityMatrix,
    pub songs: SimilarityMatrix,
    pub combined: SimilarityMatrix,
    pub distinct: SimilarityMatrix,
}

impl MatrixSet {
    pub fn get(&self, dataset: Dataset) -> &SimilarityMatrix {
        match dataset {
            Dataset::Sonnets => &self.sonnets,
            Dataset::Songs => &self.songs,
            Dataset::Combined => &self.combined,
            Dataset::Distinct => &self.distinct,
        }
    }

    /// Scores fed to the tests: strict upper triangle of square layouts,
    /// every cell of the distinct layout.
    pub fn sample(&self, dataset: Dataset) -> Vec<f64> {
        self.get(dataset).sample()
    }
}

pub fn build_matrices(
    manifest: &DatasetManifest,
    emb: &Embeddings,
) -> Result<BTreeMap<Method, MatrixSet>> {
    let mut out = BTreeMap::new();
    for (&method, set) in &emb.sets {
        let stage = format!("sim/{method}");
        let sonnets = set.select(manifest.sonnet_ids.iter().map(String::as_str)).stage(&stage)?;
        let songs = set.select(manifest.song_ids.iter().map(String::as_str)).stage(&stage)?;
        let matrices = MatrixSet {
            sonnets: similarity_matrix(&sonnets, None).stage(&stage)?,
            songs: similarity_matrix(&songs, None).stage(&stage)?,
            combined: similarity_matrix(set, None).stage(&stage)?,
            distinct: similarity_matrix(&sonnets, Some(&songs)).stage(&stage)?,
        };
        out.insert(method, matrices);
    }
    Ok(out)
}

pub fn write_matrices(out: &Path, matrices: &BTreeMap<Method, MatrixSet>) -> Result<()> {
    ensure_dir(out)?;
    for (method, set) in matrices {
        for dataset in Dataset::ALL {
            let path = out.join(format!("matrix_{}_{method}.csv", dataset.as_str()));
            emit_matrix_csv(set.get(dataset), &path)?;
        }
    }
    Ok(())
}

pub fn mean_table(cfg: &RunConfig, matrices: &BTreeMap<Method, MatrixSet>) -> Result<Vec<MeanEntry>> {
    let mut rows = Vec::new();
    for dataset in Dataset::ALL {
        for (&method, set) in matrices {
            let m = set.get(dataset);
            let policy = match m.kind() {
                MatrixKind::Square => cfg.means.square,
                MatrixKind::Cross => cfg.means.cross,
            };
            let cells = match (policy, m.kind()) {
                (MeanPolicy::UpperTriangleExclDiag, _) => {
                    m.rows() * (m.rows() - 1) / 2
                }
                _ => m.rows() * m.cols(),
            };
            rows.push(MeanEntry {
                dataset,
                method,
                mean: mean_score(m, policy).stage("stats/means")?,
                cells,
            });
        }
    }
    Ok(rows)
}

/// Highest and lowest scoring pairs for one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub dataset: Dataset,
    pub method: Method,
    pub highest: Vec<PairScore>,
    pub lowest: Vec<PairScore>,
}

pub fn outliers(cfg: &RunConfig, matrices: &BTreeMap<Method, MatrixSet>) -> Result<Vec<OutlierReport>> {
    let none = HashMap::new();
    let mut reports = Vec::new();
    for (&method, set) in matrices {
        for dataset in Dataset::ALL {
            let m = set.get(dataset);
            let pairs = |d| extreme_pairs(m, cfg.outlier_pairs, d, PairFilter::Any, &none);
            reports.push(OutlierReport {
                dataset,
                method,
                highest: pairs(Direction::Highest).stage("outliers")?,
                lowest: pairs(Direction::Lowest).stage("outliers")?,
            });
        }
    }
    Ok(reports)
}

pub fn write_outliers(out: &Path, reports: &[OutlierReport]) -> Result<()> {
    ensure_dir(out)?;
    for r in reports {
        let path = out.join(format!("outliers_{}_{}.json", r.dataset.as_str(), r.method));
        write_json(&path, r)?;
    }
    Ok(())
}

struct Hypotheses {
    entries: Vec<HypothesisEntry>,
    figures: Vec<FigureData>,
}

fn group(label: &str, values: Vec<f64>) -> Result<GroupSample> {
    GroupSample::new(label, values)
}

fn require<'a>(
    matrices: &'a BTreeMap<Method, MatrixSet>,
    method: Method,
    id: &str,
) -> Result<&'a MatrixSet> {
    matrices
        .get(&method)
        .ok_or_else(|| Error::invalid(format!("{id} needs {method} embeddings")))
}

fn fmt_mean(label: &str, mean: f64) -> String {
    format!("{label} {mean:.4}")
}

/// Labels ordered by mean, highest first.
fn ranking(groups: &[GroupSample]) -> Vec<(String, f64)> {
    let mut r: Vec<(String, f64)> = groups.iter().map(|g| (g.label.clone(), g.mean())).collect();
    r.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    r
}

/// Whether `label` has the highest mean and Tukey finds it significantly
/// above every other group.
fn tukey_dominates(tukey: &TukeyResult, label: &str) -> bool {
    let others: Vec<_> = tukey
        .pairs
        .iter()
        .filter(|p| p.label_a == label || p.label_b == label)
        .collect();
    !others.is_empty()
        && others.iter().all(|p| {
            let diff = if p.label_a == label { p.mean_diff } else { -p.mean_diff };
            diff > 0.0 && p.significant_at_alpha
        })
}

fn anova_bundle(
    groups: &[GroupSample],
    alpha: f64,
    expected_top: &str,
    stage: &str,
) -> Result<(HypothesisTest, String)> {
    let anova = one_way_anova(groups).stage(stage)?;
    let tukey = tukey_hsd(groups, alpha).stage(stage)?;
    let ranked = ranking(groups);
    let order: Vec<String> = ranked.iter().map(|(l, m)| fmt_mean(l, *m)).collect();
    let verdict = if tukey_dominates(&tukey, expected_top) {
        format!("{expected_top} is significantly highest under Tukey HSD")
    } else if ranked[0].0 == expected_top {
        format!("{expected_top} has the highest mean but is not significantly above every other group")
    } else {
        format!("{expected_top} does not have the highest mean")
    };
    Ok((
        HypothesisTest::AnovaTukey { anova, tukey },
        format!("means by rank: {}; {verdict}", order.join(" > ")),
    ))
}

fn two_group_note(higher_expected: (&str, f64), other: (&str, f64)) -> String {
    let relation = if higher_expected.1 > other.1 {
        ">"
    } else if higher_expected.1 < other.1 {
        "<"
    } else {
        "="
    };
    format!(
        "{} {relation} {}; hypothesized {} > {}",
        fmt_mean(higher_expected.0, higher_expected.1),
        fmt_mean(other.0, other.1),
        higher_expected.0,
        other.0
    )
}

fn test_hypotheses(
    cfg: &RunConfig,
    matrices: &BTreeMap<Method, MatrixSet>,
    omitted: &[OmittedMethod],
) -> Result<Hypotheses> {
    let alpha = cfg.alpha;
    let y_label = "mean cosine similarity";
    let sample_of = |set: &MatrixSet, d: Dataset| set.sample(d);

    let tfidf = require(matrices, Method::Tfidf, "H1")?;
    let h1_groups = vec![
        group(SONNETS, sample_of(tfidf, Dataset::Sonnets))?,
        group(SONGS, sample_of(tfidf, Dataset::Songs))?,
        group("combined", sample_of(tfidf, Dataset::Combined))?,
    ];
    let (h1_test, h1_note) = anova_bundle(&h1_groups, alpha, SONGS, "stats/H1")?;
    let h1 = HypothesisEntry::new(
        "H1",
        "TF-IDF mean similarity is equal across the sonnets, songs and combined datasets",
        h1_test,
        alpha,
        h1_note,
        Vec::new(),
    );

    let wordvec = require(matrices, Method::AvgWordvec, "H2")?;
    let h2_songs = group(SONGS, sample_of(wordvec, Dataset::Songs))?;
    let h2_sonnets = group(SONNETS, sample_of(wordvec, Dataset::Sonnets))?;
    let h2_result =
        mann_whitney_u(&h2_songs, &h2_sonnets, cfg.mann_whitney_alternative).stage("stats/H2")?;
    let alt_note = match cfg.mann_whitney_alternative {
        Alternative::TwoSided => "two-sided test".to_owned(),
        Alternative::Greater => "one-sided test, alternative: songs > sonnets".to_owned(),
        Alternative::Less => "one-sided test, alternative: songs < sonnets".to_owned(),
    };
    let h2 = HypothesisEntry::new(
        "H2",
        "averaged word-vector similarity has the same distribution for songs and sonnets",
        HypothesisTest::MannWhitney { result: h2_result },
        alpha,
        two_group_note((SONGS, h2_songs.mean()), (SONNETS, h2_sonnets.mean())),
        vec![alt_note],
    );

    let h3_wordvec = group("wordvec", sample_of(wordvec, Dataset::Distinct))?;
    let h3_tfidf = group("tfidf", sample_of(tfidf, Dataset::Distinct))?;
    let h3_result = wilcoxon_signed_rank(&h3_wordvec, &h3_tfidf).stage("stats/H3")?;
    let h3 = HypothesisEntry::new(
        "H3",
        "paired distinct-layout scores do not differ between averaged word vectors and TF-IDF",
        HypothesisTest::Wilcoxon { result: h3_result },
        alpha,
        two_group_note(("wordvec", h3_wordvec.mean()), ("tfidf", h3_tfidf.mean())),
        vec![format!("{} pairs matched by (sonnet, song) cell", h3_wordvec.len())],
    );

    let h4_groups = matrices
        .iter()
        .map(|(method, set)| group(method.as_str(), sample_of(set, Dataset::Sonnets)))
        .collect::<Result<Vec<_>>>()?;
    let (h4_test, h4_note) = anova_bundle(&h4_groups, alpha, Method::External.as_str(), "stats/H4")?;
    let mut h4_notes = Vec::new();
    if let Some(o) = omitted.iter().find(|o| o.method == Method::External) {
        h4_notes.push(format!(
            "external embeddings omitted ({}); methods compared: {}",
            o.reason,
            h4_groups.iter().map(|g| g.label.as_str()).collect::<Vec<_>>().join(", ")
        ));
    }
    let h4 = HypothesisEntry::new(
        "H4",
        "sonnet-layout mean similarity is equal across embedding methods",
        h4_test,
        alpha,
        h4_note,
        h4_notes,
    );

    let fig = |caption: &str, groups: &[&GroupSample]| {
        let pairs: Vec<(&str, &[f64])> =
            groups.iter().map(|g| (g.label.as_str(), g.values.as_slice())).collect();
        FigureData::from_samples(caption, y_label, &pairs)
    };
    let figures = vec![
        fig("TF-IDF mean similarity by dataset", &h1_groups.iter().collect::<Vec<_>>())?,
        fig("Averaged word-vector mean similarity by dataset", &[&h2_sonnets, &h2_songs])?,
        fig("Distinct-layout mean similarity by method", &[&h3_tfidf, &h3_wordvec])?,
        fig("Sonnet-layout mean similarity by method", &h4_groups.iter().collect::<Vec<_>>())?,
    ];

    Ok(Hypotheses {
        entries: vec![h1, h2, h3, h4],
        figures,
    })
}

fn source_date_epoch() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

/// Runs the hypothesis tests over prebuilt matrices and assembles the report.
pub fn hypothesis_report(
    cfg: &RunConfig,
    manifest: &DatasetManifest,
    emb: &Embeddings,
    matrices: &BTreeMap<Method, MatrixSet>,
) -> Result<(HypothesisReport, Vec<FigureData>)> {
    let tested = test_hypotheses(cfg, matrices, &emb.omitted)?;
    let zero_vectors = emb
        .sets
        .iter()
        .map(|(&method, set)| {
            let ids: Vec<String> = set.zero_vector_ids().into_iter().map(str::to_owned).collect();
            ZeroVectorCount {
                method,
                count: ids.len(),
                ids,
            }
        })
        .collect();
    let report = HypothesisReport {
        hypotheses: tested.entries,
        means: mean_table(cfg, matrices)?,
        methods: matrices.keys().copied().collect(),
        omitted_methods: emb.omitted.clone(),
        zero_vectors,
        corpora: manifest.corpora.clone(),
        balancing: manifest.balancing.clone(),
        mean_policies: cfg.means,
        assumptions: vec![
            "ANOVA and Tukey HSD treat every pairwise score as an independent observation; \
             scores sharing a document are dependent and not normally distributed"
                .into(),
            "rank tests use the normal approximation with tie and continuity corrections".into(),
            "square layouts contribute their strict upper triangle; the distinct layout contributes every cell"
                .into(),
        ],
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            deterministic_training: cfg.wordvec.deterministic,
            wordvec_source: emb.wordvec_source.clone(),
            source_date_epoch: source_date_epoch(),
        },
    };
    report.check()?;
    Ok((report, tested.figures))
}

pub fn write_report(out: &Path, report: &HypothesisReport, figures: &[FigureData]) -> Result<()> {
    ensure_dir(out)?;
    emit_report_json(report, &out.join("report.json"))?;
    for (i, f) in figures.iter().enumerate() {
        emit_bar_svg(f, &out.join(format!("figure_h{}.svg", i + 1)))?;
    }
    Ok(())
}

/// Every stage in order, writing all artifacts to `cfg.out`.
pub fn run_all(cfg: &RunConfig) -> Result<HypothesisReport> {
    cfg.validate()?;
    let out = cfg.out.as_path();
    let ingested = ingest(cfg).stage("ingest")?;
    ingested.write(out).stage("ingest")?;
    let data = prepare_from(cfg, &ingested)?;
    write_eda(out, &run_eda(cfg, &data)?).stage("eda")?;

    let emb = embed_and_cache(cfg, &data)?;

    let matrices = build_matrices(&data.manifest, &emb)?;
    write_matrices(out, &matrices).stage("sim")?;
    write_outliers(out, &outliers(cfg, &matrices)?).stage("outliers")?;

    let (report, figures) = hypothesis_report(cfg, &data.manifest, &emb, &matrices)?;
    write_report(out, &report, &figures).stage("hypotheses")?;
    Ok(report)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    let mut s = String::new();
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
