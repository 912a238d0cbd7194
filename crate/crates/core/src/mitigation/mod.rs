//! Finding the features that drive procedural unfairness and removing
//! their influence, either by retraining without them or by fine-tuning
//! with a penalty on the loss's input gradients along them.

mod detect;
mod modify;
mod retrain;

pub use crate::model::explanation_loss;
pub use detect::{detect_from_explanations, detect_unfair_features, Detection, UnfairFeatureSet, DEFAULT_BETA};
pub use modify::{alpha_sweep, modify, modify_model, AlphaSweepRow, ModifyConfig, ModifyOutcome, ModifyTrace};
pub use retrain::{retrain_without, RetrainOutcome, RetrainSummary};

use crate::data::SplitDataset;
use crate::error::Result;
use crate::model::{predict_labels, Classifier};
use crate::scalar::Scalar;

/// Test-split accuracy of `model` reading dataset `columns`.
pub fn test_accuracy<T: Scalar, M: Classifier<T>>(
    model: &M,
    columns: &[usize],
    split: &SplitDataset<T>,
) -> Result<f64> {
    let design = split.test.design(columns)?;
    crate::fairness::accuracy(&predict_labels(model, &design.x)?, split.test.labels())
}
