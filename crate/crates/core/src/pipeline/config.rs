use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::similarity::MeanPolicy;
use crate::stats::Alternative;
use crate::vectorize::WordVecParams;

/// Experiment definition, read from TOML.
///
/// Relative paths in a config file are resolved against the file's
/// directory. A corpus path ending in `.txt` is read as numeral-headed
/// blocks (one poem per block); anything else is read as corpus JSONL.
/// Pretrained vectors ending in `.bin` use the binary word-vector format,
/// anything else the text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sonnets: Option<PathBuf>,
    pub songs: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// Id list replacing random balancing: exactly these documents are dropped.
    pub exclude: Option<PathBuf>,
    pub seed: u64,
    pub target_size: usize,
    pub pretrained_vectors: Option<PathBuf>,
    pub external_embeddings: Option<PathBuf>,
    pub out: PathBuf,
    pub alpha: f64,
    pub mann_whitney_alternative: Alternative,
    pub outlier_pairs: usize,
    pub top_words: usize,
    pub wordvec: WordVecParams,
    pub means: MeanPolicies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanPolicies {
    pub square: MeanPolicy,
    pub cross: MeanPolicy,
}

impl Default for MeanPolicies {
    fn default() -> Self {
        Self {
            square: MeanPolicy::UpperTriangleExclDiag,
            cross: MeanPolicy::AllCells,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sonnets: None,
            songs: None,
            stopwords: None,
            exclude: None,
            seed: 42,
            target_size: 154,
            pretrained_vectors: None,
            external_embeddings: None,
            out: PathBuf::from("out"),
            alpha: 0.05,
            mann_whitney_alternative: Alternative::TwoSided,
            outlier_pairs: 5,
            top_words: 10,
            wordvec: WordVecParams::default(),
            means: MeanPolicies::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_relative_to(base);
        }
        Ok(cfg)
    }

    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.sonnets,
            &mut self.songs,
            &mut self.stopwords,
            &mut self.exclude,
            &mut self.pretrained_vectors,
            &mut self.external_embeddings,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.out);
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_size < 2 {
            return Err(Error::invalid("target_size must be at least 2"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.outlier_pairs == 0 {
            return Err(Error::invalid("outlier_pairs must be positive"));
        }
        if self.means.cross != MeanPolicy::AllCells {
            return Err(Error::invalid("means.cross must be all_cells"));
        }
        Ok(())
    }

    pub fn sonnets_path(&self) -> Result<&Path> {
        self.sonnets
            .as_deref()
            .ok_or_else(|| Error::invalid("no sonnet corpus configured (set `sonnets`)"))
    }

    pub fn songs_path(&self) -> Result<&Path> {
        self.songs
            .as_deref()
            .ok_or_else(|| Error::invalid("no song corpus configured (set `songs`)"))
    }

    /// Hex SHA-256 of the resolved config, serialized as JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Hash over the settings and input file contents that determine the
    /// embeddings. Settings that only affect testing and reporting are
    /// masked out.
    pub fn embedding_key(&self) -> String {
        let defaults = RunConfig::default();
        let masked = RunConfig {
            out: defaults.out,
            alpha: defaults.alpha,
            mann_whitney_alternative: defaults.mann_whitney_alternative,
            outlier_pairs: defaults.outlier_pairs,
            top_words: defaults.top_words,
            means: defaults.means,
            ..self.clone()
        };
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&masked).expect("config serializes"));
        for path in [
            &self.sonnets,
            &self.songs,
            &self.stopwords,
            &self.exclude,
            &self.pretrained_vectors,
            &self.external_embeddings,
        ]
        .into_iter()
        .flatten()
        {
            match fs::read(path) {
                Ok(bytes) => hasher.update(Sha256::digest(&bytes)),
                Err(_) => hasher.update(b"unreadable"),
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_toml(
            r#"
            sonnets = "data/sonnets.txt"
            songs = "data/songs.jsonl"
            seed = 7
            mann_whitney_alternative = "greater"

            [wordvec]
            dim = 32
            epochs = 2
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.target_size, 154);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.wordvec.dim, 32);
        assert_eq!(cfg.wordvec.window, 5);
        assert_eq!(cfg.mann_whitney_alternative, Alternative::Greater);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::from_toml("sonets = 'x'").is_err());
        let cfg = RunConfig::from_toml("target_size = 1").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = RunConfig::from_toml("alpha = 1.0").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "songs = 'songs.jsonl'\nout = '/abs/out'\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.songs.unwrap(), dir.path().join("songs.jsonl"));
        assert_eq!(cfg.out, PathBuf::from("/abs/out"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let mut c = a.clone();
        c.alpha = 0.01;
        c.out = PathBuf::from("elsewhere");
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.embedding_key(), c.embedding_key());
        assert_ne!(a.embedding_key(), b.embedding_key());
    }
}
