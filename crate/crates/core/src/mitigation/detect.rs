use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::ExplanationSet;
use crate::data::SplitDataset;
use crate::error::{Error, Result};
use crate::fairness::{audit_with_details, AuditConfig, AuditReport};
use crate::model::Classifier;
use crate::scalar::Scalar;
use crate::two_sample::{permutation_pvalue, KernelConfig, PermutationConfig};

pub const DEFAULT_BETA: f64 = 0.05;

/// Features whose attributions differ between the matched groups.
/// Indices are positions in the model's input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfairFeatureSet {
    pub indices: Vec<usize>,
    pub names: Vec<String>,
    pub per_feature_pvalues: Vec<f64>,
    pub threshold: f64,
}

impl UnfairFeatureSet {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }
}

/// Runs the one-dimensional permutation test on each attribution column of
/// `e1` against `e2` and flags features with `p ≤ beta`.
pub fn detect_from_explanations<T: Scalar>(
    e1: &ExplanationSet<T>,
    e2: &ExplanationSet<T>,
    kernel: &KernelConfig,
    perm: &PermutationConfig,
    beta: f64,
) -> Result<UnfairFeatureSet> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Config(format!("beta = {beta} must lie in [0, 1]")));
    }
    if e1.n_features() != e2.n_features() {
        return Err(Error::Shape {
            expected: format!("{} features", e1.n_features()),
            got: e2.n_features().to_string(),
        });
    }
    let per_feature_pvalues = (0..e1.n_features())
        .into_par_iter()
        .map(|k| permutation_pvalue(&e1.column(k), &e2.column(k), kernel, perm))
        .collect::<Result<Vec<f64>>>()?;
    let indices: Vec<usize> =
        per_feature_pvalues.iter().enumerate().filter(|(_, &p)| p <= beta).map(|(k, _)| k).collect();
    Ok(UnfairFeatureSet {
        names: indices.iter().map(|&k| e1.feature_names[k].clone()).collect(),
        indices,
        per_feature_pvalues,
        threshold: beta,
    })
}

/// Audit result together with the unfair features found on the same
/// explanation sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub report: AuditReport,
    pub unfair: UnfairFeatureSet,
}

pub fn detect_unfair_features<T: Scalar, M: Classifier<T>>(
    model: &M,
    columns: &[usize],
    split: &SplitDataset<T>,
    config: &AuditConfig,
    beta: f64,
) -> Result<Detection> {
    let (report, gpf) = audit_with_details(model, columns, split, config)?;
    let unfair = detect_from_explanations(&gpf.e1, &gpf.e2, &config.kernel, &config.permutation(), beta)?;
    Ok(Detection { report, unfair })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::Explanation;

    fn set(rows: &[[f64; 2]]) -> ExplanationSet<f64> {
        let rows =
            rows.iter().map(|r| Explanation { values: r.to_vec(), base_value: 0.0, target: r[0] + r[1] }).collect();
        ExplanationSet::new(rows, vec!["a".into(), "b".into()]).unwrap()
    }

    fn sets() -> (ExplanationSet<f64>, ExplanationSet<f64>) {
        let e1: Vec<[f64; 2]> = (0..30).map(|i| [i as f64 * 0.01, (i % 7) as f64]).collect();
        let e2: Vec<[f64; 2]> = (0..30).map(|i| [5.0 + i as f64 * 0.01, ((i + 3) % 7) as f64]).collect();
        (set(&e1), set(&e2))
    }

    #[test]
    fn flags_only_the_shifted_column() {
        let (e1, e2) = sets();
        let ufs =
            detect_from_explanations(&e1, &e2, &KernelConfig::default(), &PermutationConfig::new(0), DEFAULT_BETA)
                .unwrap();
        assert_eq!(ufs.indices, vec![0]);
        assert_eq!(ufs.names, vec!["a".to_string()]);
        assert!(ufs.per_feature_pvalues[1] > 0.5);
    }

    #[test]
    fn identical_sets_and_zero_beta_flag_nothing() {
        let (e1, e2) = sets();
        let cfg = KernelConfig::default();
        let perm = PermutationConfig::new(1);
        assert!(detect_from_explanations(&e1, &e1, &cfg, &perm, DEFAULT_BETA).unwrap().is_empty());
        assert!(detect_from_explanations(&e1, &e2, &cfg, &perm, 0.0).unwrap().is_empty());
    }
}
