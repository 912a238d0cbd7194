//! Feature attribution: Kernel SHAP for audited models and an exact
//! Shapley enumerator used to verify it.
//!
//! Both use the interventional value function: features outside a
//! coalition are filled in from each background row and the model output
//! is averaged over the background.

mod exact;
mod kernel_shap;

use std::fs;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;

pub use exact::{exact_shapley, MAX_EXACT_FEATURES};
pub use kernel_shap::{explain_set, kernel_shap, KernelShap, DEFAULT_MAX_COALITIONS};

/// Attribution of one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation<T> {
    pub values: Vec<T>,
    /// Expected model output over the background.
    pub base_value: T,
    /// Model output at the explained point.
    pub target: T,
}

impl<T: Scalar> Explanation<T> {
    /// `|base + Σ values − target|`.
    pub fn local_accuracy_gap(&self) -> T {
        (self.base_value + self.values.iter().copied().sum::<T>() - self.target).abs()
    }
}

/// Explanations of several rows over a common feature list.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplanationSet<T> {
    pub rows: Vec<Explanation<T>>,
    pub feature_names: Vec<String>,
}

impl<T: Scalar> ExplanationSet<T> {
    pub fn new(rows: Vec<Explanation<T>>, feature_names: Vec<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dataset("explanation set must hold at least one row".into()));
        }
        let d = feature_names.len();
        if let Some(bad) = rows.iter().find(|r| r.values.len() != d) {
            return Err(Error::Shape { expected: format!("{d} attributions"), got: bad.values.len().to_string() });
        }
        Ok(ExplanationSet { rows, feature_names })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// `n × d` attribution matrix.
    pub fn values(&self) -> Array2<T> {
        let mut out = Array2::zeros((self.len(), self.n_features()));
        for (i, r) in self.rows.iter().enumerate() {
            for (j, &v) in r.values.iter().enumerate() {
                out[[i, j]] = v;
            }
        }
        out
    }

    /// `n × 1` slice of the attributions of feature `k`.
    pub fn column(&self, k: usize) -> Array2<T> {
        self.values().select(Axis(1), &[k])
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.extend(["base", "target"]);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut cells: Vec<String> = r.values.iter().map(|v| v.to_f64_lossy().to_string()).collect();
            cells.push(r.base_value.to_f64_lossy().to_string());
            cells.push(r.target.to_f64_lossy().to_string());
            w.write_record(&cells)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Dataset(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Which model output the attributions decompose.
///
/// Log-odds is the default: under the probability the sigmoid's slope,
/// which depends on where a group's logits sit, rescales every feature's
/// attribution and makes group differences leak into features the model
/// treats identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplainedOutput {
    /// Predicted probability `p(x)`.
    Probability,
    /// Log-odds `o(x)`.
    #[default]
    Logit,
}

/// Kernel SHAP settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapConfig<T> {
    /// `k × d` background sample.
    pub background: Array2<T>,
    /// Sampled coalitions besides the empty and full ones; `None` selects
    /// `min(2^d − 2, 2048)`, which enumerates every coalition for `d ≤ 11`.
    pub n_coalitions: Option<usize>,
    /// Ridge on the regression, relative to the mean diagonal.
    pub ridge: f64,
    pub output: ExplainedOutput,
    pub seed: u64,
}

impl<T: Scalar> ShapConfig<T> {
    pub fn new(background: Array2<T>, seed: u64) -> Self {
        ShapConfig { background, n_coalitions: None, ridge: 1e-6, output: ExplainedOutput::default(), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.background.nrows() == 0 {
            return Err(Error::Config("background sample is empty".into()));
        }
        if let Some(n) = self.n_coalitions {
            if n < self.background.ncols() {
                return Err(Error::Config(format!("n_coalitions {n} below feature count {}", self.background.ncols())));
            }
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::Config("ridge must be non-negative".into()));
        }
        Ok(())
    }
}

/// Seeded sample of `size` rows without replacement (all rows if fewer).
pub fn sample_background<T: Scalar>(x: &Array2<T>, size: usize, seed: u64) -> Array2<T> {
    let m = x.nrows();
    if size >= m {
        return x.clone();
    }
    let mut idx = sample(&mut rng_for(seed, "background"), m, size).into_vec();
    idx.sort_unstable();
    x.select(Axis(0), &idx)
}
