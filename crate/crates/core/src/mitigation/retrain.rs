use serde::{Deserialize, Serialize};

use super::detect::UnfairFeatureSet;
use crate::data::SplitDataset;
use crate::error::{Error, Result};
use crate::fairness::{audit, AuditConfig, AuditReport};
use crate::model::{Classifier, Model, TrainConfig};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RetrainOutcome<T> {
    pub model: Model<T>,
    /// Dataset columns the retrained model reads.
    pub columns: Vec<usize>,
    pub train_config: TrainConfig,
    pub before: AuditReport,
    pub after: AuditReport,
}

/// Report-friendly part of a [`RetrainOutcome`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainSummary {
    pub kept_features: Vec<String>,
    pub train_config: TrainConfig,
    pub before: AuditReport,
    pub after: AuditReport,
    pub accuracy_drop: f64,
}

impl<T: Scalar> RetrainOutcome<T> {
    pub fn summary(&self) -> RetrainSummary {
        RetrainSummary {
            kept_features: self.after.features.clone(),
            train_config: self.train_config.clone(),
            before: self.before.clone(),
            after: self.after.clone(),
            accuracy_drop: self.before.accuracy - self.after.accuracy,
        }
    }
}

/// Drops the unfair features, retrains the same model family with the same
/// hyperparameters and a seed derived from the original one, and audits the
/// model before and after.
pub fn retrain_without<T: Scalar>(
    original: &Model<T>,
    columns: &[usize],
    split: &SplitDataset<T>,
    unfair: &UnfairFeatureSet,
    train_config: &TrainConfig,
    audit_config: &AuditConfig,
) -> Result<RetrainOutcome<T>> {
    if original.n_features() != columns.len() {
        return Err(Error::Shape {
            expected: format!("{} columns", original.n_features()),
            got: columns.len().to_string(),
        });
    }
    if let Some(&k) = unfair.indices.iter().find(|&&k| k >= columns.len()) {
        return Err(Error::Config(format!("unfair feature index {k} outside the model's {} inputs", columns.len())));
    }
    let kept: Vec<usize> =
        columns.iter().enumerate().filter(|(k, _)| !unfair.indices.contains(k)).map(|(_, &c)| c).collect();
    if kept.is_empty() {
        return Err(Error::AllFeaturesUnfair);
    }
    let before = audit(original, columns, split, audit_config)?;
    let cfg = TrainConfig { seed: derive_seed(train_config.seed, "retrain"), ..train_config.clone() };
    let (model, _) = Model::fit(original.kind(), &split.train.design(&kept)?, &cfg)?;
    let after = audit(&model, &kept, split, audit_config)?;
    Ok(RetrainOutcome { model, columns: kept, train_config: cfg, before, after })
}
