use serde::{Deserialize, Serialize};

use super::objective::{objective_and_gradient, ObjectiveValue, ObjectiveWeights};
use super::Classifier;
use crate::data::Design;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Full-batch Adam training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// `λ` in `BCE + λ·soft_dp`.
    pub dp_weight: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            learning_rate: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            dp_weight: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        if !(self.adam_eps > 0.0) {
            return Err(Error::Config("adam_eps must be positive".into()));
        }
        if !self.dp_weight.is_finite() {
            return Err(Error::Config("dp_weight must be finite".into()));
        }
        Ok(())
    }
}

/// Adam optimizer state over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            lr: T::of(lr),
            beta1: T::of(beta1),
            beta2: T::of(beta2),
            eps: T::of(eps),
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            t: 0,
        }
    }

    pub fn from_config(n_params: usize, cfg: &TrainConfig) -> Self {
        Self::new(n_params, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    }

    pub fn step(&mut self, params: &mut [T], grad: &[T]) {
        self.t += 1;
        let one = T::one();
        let bc1 = one - self.beta1.powi(self.t);
        let bc2 = one - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Runs `steps` Adam updates on the given objective from the model's
/// current parameters, calling `on_step` with the objective value measured
/// before each update.
pub fn adam_descent<T, M, F>(
    mut model: M,
    design: &Design<T>,
    weights: &ObjectiveWeights<T>,
    steps: usize,
    adam: &mut Adam<T>,
    mut on_step: F,
) -> Result<M>
where
    T: Scalar,
    M: Classifier<T>,
    F: FnMut(usize, &ObjectiveValue<T>),
{
    let mut params = model.params();
    for step in 0..steps {
        let (value, grad) = objective_and_gradient(&model, design, weights)?;
        if !value.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { step });
        }
        on_step(step, &value);
        adam.step(&mut params, &grad);
        model.set_params(&params);
    }
    Ok(model)
}

/// Full-batch Adam on `BCE + λ·soft_dp`; returns the trained model and the
/// per-epoch total loss (measured before each update).
pub fn train<T: Scalar, M: Classifier<T>>(model: M, design: &Design<T>, config: &TrainConfig) -> Result<(M, Vec<f64>)> {
    config.validate()?;
    if design.n_rows() == 0 {
        return Err(Error::Dataset("cannot train on an empty dataset".into()));
    }
    let weights = ObjectiveWeights::with_dp(T::of(config.dp_weight));
    let mut adam = Adam::from_config(model.n_params(), config);
    let mut trace = Vec::with_capacity(config.epochs);
    let model =
        adam_descent(model, design, &weights, config.epochs, &mut adam, |_, v| trace.push(v.total.to_f64_lossy()))?;
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Group;
    use crate::model::{init_mlp, LogisticModel};
    use ndarray::{array, Array1};

    fn tiny_design() -> Design<f64> {
        Design {
            x: array![[0.0, 1.0], [1.0, 0.0], [2.0, 1.0], [-1.0, 0.0], [-2.0, 1.0], [0.5, 0.0]],
            y: Array1::from(vec![1.0, 1.0, 1.0, 0.0, 0.0, 1.0]),
            groups: vec![
                Group::Advantaged,
                Group::Disadvantaged,
                Group::Advantaged,
                Group::Disadvantaged,
                Group::Advantaged,
                Group::Disadvantaged,
            ],
            feature_names: vec!["a".into(), "s".into()],
        }
    }

    #[test]
    fn zero_epochs_is_identity() {
        let m = init_mlp::<f64>(2, 4, 3).unwrap();
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        let (out, trace) = train(m.clone(), &tiny_design(), &cfg).unwrap();
        assert_eq!(out, m);
        assert!(trace.is_empty());
    }

    #[test]
    fn training_reduces_loss_and_is_deterministic() {
        let cfg = TrainConfig { epochs: 200, ..Default::default() };
        let (a, trace) = train(LogisticModel::<f64>::zeros(2), &tiny_design(), &cfg).unwrap();
        assert!(trace.last().unwrap() < &trace[0]);
        let (b, _) = train(LogisticModel::<f64>::zeros(2), &tiny_design(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_learning_rate() {
        let cfg = TrainConfig { learning_rate: 0.0, ..Default::default() };
        assert!(train(LogisticModel::<f64>::zeros(2), &tiny_design(), &cfg).is_err());
    }

    #[test]
    fn divergence_reports_step() {
        let mut d = tiny_design();
        d.x[[0, 0]] = f64::NAN;
        let err = train(LogisticModel::<f64>::zeros(2), &d, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence { step: 0 }));
    }
}
