use serde::{Deserialize, Serialize};

use super::detect::UnfairFeatureSet;
use super::test_accuracy;
use crate::data::{Design, SplitDataset};
use crate::error::{Error, Result};
use crate::fairness::{audit, AuditConfig, AuditReport};
use crate::model::{explanation_loss, objective_and_gradient, Adam, Classifier, ObjectiveWeights, TrainConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModifyConfig {
    /// Weight `α` of the explanation loss.
    pub alpha: f64,
    /// Number of Adam steps `τ`.
    pub tau: usize,
    /// Norm of the explanation loss; only 1 is supported.
    pub norm_p: u32,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for ModifyConfig {
    fn default() -> Self {
        ModifyConfig { alpha: 15.0, tau: 200, norm_p: 1, learning_rate: 0.01, seed: 0 }
    }
}

impl ModifyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha = {} must be finite and non-negative", self.alpha)));
        }
        if self.norm_p != 1 {
            return Err(Error::Config(format!(
                "only the L1 explanation loss is implemented (norm_p = {})",
                self.norm_p
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }

    fn adam<T: Scalar>(&self, n_params: usize) -> Adam<T> {
        let d = TrainConfig::default();
        Adam::new(n_params, self.learning_rate, d.adam_beta1, d.adam_beta2, d.adam_eps)
    }
}

/// BCE and explanation loss measured before each step, plus after the last.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModifyTrace {
    pub bce: Vec<f64>,
    pub zeta: Vec<f64>,
}

impl ModifyTrace {
    pub fn initial_zeta(&self) -> f64 {
        self.zeta.first().copied().unwrap_or(0.0)
    }

    pub fn final_zeta(&self) -> f64 {
        self.zeta.last().copied().unwrap_or(0.0)
    }
}

/// `τ` full-batch Adam steps on `BCE + α·ζ` from the model's current
/// parameters. With `α = 0` this is exactly continued BCE training.
pub fn modify<T: Scalar, M: Classifier<T>>(
    model: &M,
    design: &Design<T>,
    unfair: &[usize],
    config: &ModifyConfig,
) -> Result<(M, ModifyTrace)> {
    config.validate()?;
    let weights = ObjectiveWeights::with_explanation(T::of(config.alpha), unfair.to_vec());
    let y = design.y.to_vec();
    let zeta_of = |m: &M, v: T| -> Result<f64> {
        // ζ is only evaluated by the objective when it is weighted
        if config.alpha == 0.0 {
            Ok(explanation_loss(m, &design.x, &y, unfair)?.to_f64_lossy())
        } else {
            Ok(v.to_f64_lossy())
        }
    };
    let mut model = model.clone();
    let mut adam = config.adam::<T>(model.n_params());
    let mut params = model.params();
    let mut trace = ModifyTrace::default();
    for step in 0..=config.tau {
        let (value, grad) = objective_and_gradient(&model, design, &weights)?;
        if !value.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step });
        }
        trace.bce.push(value.bce.to_f64_lossy());
        trace.zeta.push(zeta_of(&model, value.zeta)?);
        if step == config.tau {
            break;
        }
        adam.step(&mut params, &grad);
        model.set_params(&params);
    }
    Ok((model, trace))
}

#[derive(Debug, Clone)]
pub struct ModifyOutcome<M> {
    pub model: M,
    pub trace: ModifyTrace,
    pub before: AuditReport,
    pub after: AuditReport,
}

/// Fine-tunes `original` on the training split against the unfair features
/// and audits it before and after.
pub fn modify_model<T: Scalar, M: Classifier<T>>(
    original: &M,
    columns: &[usize],
    split: &SplitDataset<T>,
    unfair: &UnfairFeatureSet,
    config: &ModifyConfig,
    audit_config: &AuditConfig,
) -> Result<ModifyOutcome<M>> {
    let design = split.train.design(columns)?;
    let (model, trace) = modify(original, &design, &unfair.indices, config)?;
    let before = audit(original, columns, split, audit_config)?;
    let after = audit(&model, columns, split, audit_config)?;
    Ok(ModifyOutcome { model, trace, before, after })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSweepRow {
    pub alpha: f64,
    pub initial_zeta: f64,
    pub final_zeta: f64,
    pub accuracy_before: f64,
    pub accuracy_after: f64,
    pub accuracy_drop: f64,
}

impl AlphaSweepRow {
    pub const CSV_HEADER: &'static str = "alpha,initial_zeta,final_zeta,accuracy_before,accuracy_after,accuracy_drop";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6e},{:.6e},{:.6},{:.6},{:.6}",
            self.alpha,
            self.initial_zeta,
            self.final_zeta,
            self.accuracy_before,
            self.accuracy_after,
            self.accuracy_drop
        )
    }
}

/// One modification per `α` from the same starting model and seed.
pub fn alpha_sweep<T: Scalar, M: Classifier<T>>(
    original: &M,
    columns: &[usize],
    split: &SplitDataset<T>,
    unfair: &UnfairFeatureSet,
    alphas: &[f64],
    base: &ModifyConfig,
) -> Result<Vec<AlphaSweepRow>> {
    let design = split.train.design(columns)?;
    let accuracy_before = test_accuracy(original, columns, split)?;
    alphas
        .iter()
        .map(|&alpha| {
            let cfg = ModifyConfig { alpha, ..base.clone() };
            let (model, trace) = modify(original, &design, &unfair.indices, &cfg)?;
            let accuracy_after = test_accuracy(&model, columns, split)?;
            Ok(AlphaSweepRow {
                alpha,
                initial_zeta: trace.initial_zeta(),
                final_zeta: trace.final_zeta(),
                accuracy_before,
                accuracy_after,
                accuracy_drop: accuracy_before - accuracy_after,
            })
        })
        .collect()
}
