use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use docsim::pipeline::{
    build_matrices, cached_or_embed, embed_and_cache, hypothesis_report, ingest, mean_table,
    outliers, prepare, prepare_from, run_all, run_eda, write_eda, write_matrices, write_outliers,
    write_report, MatrixSet, RunConfig,
};
use docsim::stats::Alternative;
use docsim::vectorize::Method;
use docsim::Result;

#[derive(Parser)]
#[command(name = "docsim", version, about = "Document similarity experiments over two text corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Load and balance both corpora; write the kept corpora and excluded ids.
    Ingest,
    /// Write vocabulary statistics for each corpus.
    Eda,
    /// Embed every document with all available methods and cache the result.
    Embed,
    /// Write the similarity matrices.
    Sim,
    /// Print and write the table of mean scores per dataset and method.
    Stats,
    /// Run the four hypothesis tests; write report.json and figures.
    Hypotheses,
    /// Write the highest and lowest scoring document pairs.
    Outliers,
    /// Run every stage.
    RunAll,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlternativeArg {
    TwoSided,
    Greater,
    Less,
}

#[derive(Args)]
struct Common {
    /// TOML experiment definition.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sonnet corpus (`.txt` numbered blocks or JSONL).
    #[arg(long, global = true)]
    sonnets: Option<PathBuf>,
    /// Song corpus (JSONL).
    #[arg(long, global = true)]
    songs: Option<PathBuf>,
    /// Seed for balancing and word-vector training.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    stopwords: Option<PathBuf>,
    /// Id list to drop instead of random balancing.
    #[arg(long, global = true)]
    exclude: Option<PathBuf>,
    /// Restrict `sim`, `stats` and `outliers` output to one method.
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Word vectors to load instead of training (`.bin` for binary format).
    #[arg(long, global = true)]
    pretrained_vectors: Option<PathBuf>,
    /// Document embeddings JSONL produced by an external encoder.
    #[arg(long, global = true)]
    external_embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Alternative hypothesis for the Mann-Whitney test.
    #[arg(long, global = true, value_enum)]
    alternative: Option<AlternativeArg>,
    /// Single-threaded, bit-reproducible word-vector training.
    #[arg(long, global = true, value_enum)]
    deterministic: Option<Switch>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
            if v.is_some() {
                slot.clone_from(v);
            }
        };
        set(&mut cfg.sonnets, &self.sonnets);
        set(&mut cfg.songs, &self.songs);
        set(&mut cfg.stopwords, &self.stopwords);
        set(&mut cfg.exclude, &self.exclude);
        set(&mut cfg.pretrained_vectors, &self.pretrained_vectors);
        set(&mut cfg.external_embeddings, &self.external_embeddings);
        if let Some(seed) = self.seed {
            cfg.seed = seed;
            cfg.wordvec.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out.clone_from(out);
        }
        if let Some(alpha) = self.alpha {
            cfg.alpha = alpha;
        }
        if let Some(alt) = self.alternative {
            cfg.mann_whitney_alternative = match alt {
                AlternativeArg::TwoSided => Alternative::TwoSided,
                AlternativeArg::Greater => Alternative::Greater,
                AlternativeArg::Less => Alternative::Less,
            };
        }
        if let Some(d) = self.deterministic {
            cfg.wordvec.deterministic = matches!(d, Switch::On);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn filtered(
    matrices: BTreeMap<Method, MatrixSet>,
    method: Option<Method>,
) -> Result<BTreeMap<Method, MatrixSet>> {
    match method {
        None => Ok(matrices),
        Some(m) => {
            let kept: BTreeMap<_, _> = matrices.into_iter().filter(|(k, _)| *k == m).collect();
            if kept.is_empty() {
                return Err(docsim::Error::InvalidInput(format!("no {m} embeddings available")));
            }
            Ok(kept)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.common.resolve()?;
    let out = cfg.out.clone();
    match cli.command {
        Command::Ingest => {
            let ingested = ingest(&cfg)?;
            ingested.write(&out)?;
            println!(
                "kept {} sonnets and {} songs; excluded {}",
                ingested.sonnets.len(),
                ingested.songs.len(),
                ingested.excluded.len()
            );
        }
        Command::Eda => {
            let data = prepare(&cfg)?;
            let reports = run_eda(&cfg, &data)?;
            write_eda(&out, &reports)?;
            for r in &reports {
                println!(
                    "{}: {} words, vocabulary {}, lexical diversity {:.4}",
                    r.corpus, r.total_words, r.vocabulary_size, r.lexical_diversity
                );
            }
        }
        Command::Embed => {
            let ingested = ingest(&cfg)?;
            ingested.write(&out)?;
            let data = prepare_from(&cfg, &ingested)?;
            let emb = embed_and_cache(&cfg, &data)?;
            for (method, set) in &emb.sets {
                println!("{method}: {} documents, dimension {}", set.len(), set.dim());
            }
            for o in &emb.omitted {
                println!("{}: omitted ({})", o.method, o.reason);
            }
        }
        Command::Sim => {
            let (manifest, emb) = cached_or_embed(&cfg)?;
            let matrices = filtered(build_matrices(&manifest, &emb)?, cli.common.method)?;
            write_matrices(&out, &matrices)?;
            println!("wrote matrices for {} method(s) to {}", matrices.len(), out.display());
        }
        Command::Stats => {
            let (manifest, emb) = cached_or_embed(&cfg)?;
            let matrices = filtered(build_matrices(&manifest, &emb)?, cli.common.method)?;
            let means = mean_table(&cfg, &matrices)?;
            let json = serde_json::to_string_pretty(&means).expect("means serialize") + "\n";
            let path = out.join("means.json");
            std::fs::write(&path, &json).map_err(|e| docsim::Error::Io { path, source: e })?;
            for e in &means {
                println!("{:<9} {:<8} {:.4}", e.dataset.as_str(), e.method, e.mean);
            }
        }
        Command::Hypotheses => {
            let (manifest, emb) = cached_or_embed(&cfg)?;
            let matrices = build_matrices(&manifest, &emb)?;
            let (report, figures) = hypothesis_report(&cfg, &manifest, &emb, &matrices)?;
            write_report(&out, &report, &figures)?;
            print_decisions(&report);
        }
        Command::Outliers => {
            let (manifest, emb) = cached_or_embed(&cfg)?;
            let matrices = filtered(build_matrices(&manifest, &emb)?, cli.common.method)?;
            let reports = outliers(&cfg, &matrices)?;
            write_outliers(&out, &reports)?;
            for r in &reports {
                if let (Some(hi), Some(lo)) = (r.highest.first(), r.lowest.first()) {
                    println!(
                        "{:<9} {:<8} highest {} / {} ({:.4}), lowest {} / {} ({:.4})",
                        r.dataset.as_str(),
                        r.method,
                        hi.row_id,
                        hi.col_id,
                        hi.score,
                        lo.row_id,
                        lo.col_id,
                        lo.score
                    );
                }
            }
        }
        Command::RunAll => {
            let report = run_all(&cfg)?;
            print_decisions(&report);
        }
    }
    Ok(())
}

fn print_decisions(report: &docsim::pipeline::HypothesisReport) {
    for h in &report.hypotheses {
        println!("{} p={:.3e} {:?}: {}", h.id, h.p_value, h.decision, h.direction_note);
    }
    for o in &report.omitted_methods {
        println!("note: {} omitted ({})", o.method, o.reason);
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("docsim: {e}");
            ExitCode::FAILURE
        }
    }
}
