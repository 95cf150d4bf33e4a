//! Hypothesis tests over similarity-score samples and the special functions
//! their p-values depend on.

mod procedures;
mod ptukey;
mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use procedures::{mann_whitney_u, one_way_anova, tukey_hsd, wilcoxon_signed_rank};
pub use ptukey::studentized_range_cdf;
pub use special::{f_cdf, f_sf, ln_gamma, normal_cdf, normal_sf, reg_incomplete_beta};

/// A labeled sample of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub label: String,
    pub values: Vec<f64>,
}

impl GroupSample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(Error::invalid(format!("group `{label}` is empty")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("group `{label}` has non-finite values")));
        }
        Ok(Self { label, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            label: self.label.clone(),
            n: self.len(),
            mean: self.mean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Anova,
    MannWhitney,
    Wilcoxon,
}

/// Alternative hypothesis for the rank tests. `Greater` means the first
/// sample tends to be larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    Greater,
    Less,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    /// `(between, within)` degrees of freedom; ANOVA only.
    pub df: Option<(f64, f64)>,
    /// Standardized statistic; rank tests only.
    pub z: Option<f64>,
    pub p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alternative: Option<Alternative>,
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyPair {
    pub label_a: String,
    pub label_b: String,
    /// `mean_a - mean_b`.
    pub mean_diff: f64,
    pub q: f64,
    pub p_adj: f64,
    pub significant_at_alpha: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub method: String,
    pub alpha: f64,
    pub df_within: f64,
    pub ms_within: f64,
    pub groups: Vec<GroupSummary>,
    pub pairs: Vec<TukeyPair>,
}
