use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::MeanPolicies;
use super::Dataset;
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;
use crate::stats::{TestResult, TukeyResult};
use crate::vectorize::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    RejectNull,
    FailToReject,
}

impl Decision {
    /// Rejects exactly when `p < alpha`.
    pub fn from_p(p_value: f64, alpha: f64) -> Self {
        if p_value < alpha {
            Decision::RejectNull
        } else {
            Decision::FailToReject
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisTest {
    AnovaTukey { anova: TestResult, tukey: TukeyResult },
    MannWhitney { result: TestResult },
    Wilcoxon { result: TestResult },
}

impl HypothesisTest {
    /// The p-value the decision is taken on; the omnibus ANOVA for
    /// ANOVA + Tukey bundles.
    pub fn p_value(&self) -> f64 {
        match self {
            HypothesisTest::AnovaTukey { anova, .. } => anova.p_value,
            HypothesisTest::MannWhitney { result } | HypothesisTest::Wilcoxon { result } => {
                result.p_value
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub id: String,
    pub null_hypothesis: String,
    pub test: HypothesisTest,
    pub p_value: f64,
    pub alpha: f64,
    pub decision: Decision,
    pub direction_note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl HypothesisEntry {
    pub fn new(
        id: &str,
        null_hypothesis: &str,
        test: HypothesisTest,
        alpha: f64,
        direction_note: String,
        notes: Vec<String>,
    ) -> Self {
        let p_value = test.p_value();
        Self {
            id: id.to_owned(),
            null_hypothesis: null_hypothesis.to_owned(),
            test,
            p_value,
            alpha,
            decision: Decision::from_p(p_value, alpha),
            direction_note,
            notes,
        }
    }
}

/// One cell of the dataset x method table of mean scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanEntry {
    pub dataset: Dataset,
    pub method: Method,
    pub mean: f64,
    /// Number of scores averaged.
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroVectorCount {
    pub method: Method,
    pub count: usize,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmittedMethod {
    pub method: Method,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub name: String,
    pub input_documents: usize,
    pub kept_documents: usize,
    /// Documents with no tokens left after preprocessing.
    pub empty_documents: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceStrategy {
    SeededSubsample,
    ExclusionList,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Balancing {
    pub strategy: BalanceStrategy,
    pub target_size: usize,
    pub balanced: bool,
    pub excluded: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub deterministic_training: bool,
    pub wordvec_source: String,
    /// Taken from `SOURCE_DATE_EPOCH` when set; otherwise absent so that
    /// reports stay byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_date_epoch: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub hypotheses: Vec<HypothesisEntry>,
    pub means: Vec<MeanEntry>,
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omitted_methods: Vec<OmittedMethod>,
    pub zero_vectors: Vec<ZeroVectorCount>,
    pub corpora: Vec<CorpusSummary>,
    pub balancing: Balancing,
    pub mean_policies: MeanPolicies,
    pub assumptions: Vec<String>,
    pub provenance: Provenance,
}

impl HypothesisReport {
    pub fn mean(&self, dataset: Dataset, method: Method) -> Option<f64> {
        self.means
            .iter()
            .find(|e| e.dataset == dataset && e.method == method)
            .map(|e| e.mean)
    }

    pub fn hypothesis(&self, id: &str) -> Option<&HypothesisEntry> {
        self.hypotheses.iter().find(|h| h.id == id)
    }

    /// Checks the structural invariants: four hypotheses H1..H4, decisions
    /// consistent with their p-values, means within [-1, 1].
    pub fn check(&self) -> Result<()> {
        let ids: Vec<&str> = self.hypotheses.iter().map(|h| h.id.as_str()).collect();
        if ids != ["H1", "H2", "H3", "H4"] {
            return Err(Error::invalid(format!("report hypotheses are {ids:?}")));
        }
        for h in &self.hypotheses {
            if h.p_value != h.test.p_value() || h.decision != Decision::from_p(h.p_value, h.alpha) {
                return Err(Error::invalid(format!("{} decision does not follow from its p-value", h.id)));
            }
            if !(0.0..=1.0).contains(&h.p_value) {
                return Err(Error::invalid(format!("{} p-value {} outside [0, 1]", h.id, h.p_value)));
            }
        }
        // Cosines round past 1 by a few ulps at most.
        if let Some(e) = self.means.iter().find(|e| !(e.mean.abs() <= 1.0 + 1e-12)) {
            return Err(Error::invalid(format!(
                "mean {} for {}/{} outside [-1, 1]",
                e.mean,
                e.dataset.as_str(),
                e.method
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn emit_report_json(report: &HypothesisReport, path: &Path) -> Result<()> {
    fs::write(path, report.to_json()).map_err(|e| Error::io(path, e))
}

pub fn emit_matrix_csv(m: &SimilarityMatrix, path: &Path) -> Result<()> {
    m.write_csv(path)
}
