//! The classifier families under audit and everything needed to fit them.
//!
//! Both families expose their logit `o(x)`, its input gradient
//! `v(x) = ∂o/∂x`, and a single accumulation hook for parameter gradients
//! of `o` and of `v`. Losses, the demographic-parity surrogate and the
//! explanation loss are all assembled from those three pieces in
//! [`objective`], which keeps the second-order term exact for both models.

mod io;
mod logistic;
mod mlp;
pub mod objective;
mod train;

use crate::data::Design;
use crate::scalar::Scalar;

pub use io::{ModelFile, ModelKind, FORMAT_VERSION};
pub use logistic::LogisticModel;
pub use mlp::{default_hidden, init_mlp, MlpModel};
pub use objective::{
    bce_loss, explanation_loss, input_gradient, objective_and_gradient, predict_labels, predict_proba, soft_dp,
    ObjectiveValue, ObjectiveWeights,
};
pub use train::{adam_descent, train, Adam, TrainConfig};

/// A differentiable binary classifier `p(x) = sigmoid(o(x))`.
pub trait Classifier<T: Scalar>: Clone + Send + Sync {
    fn n_features(&self) -> usize;

    fn n_params(&self) -> usize;

    /// Flat parameter vector in the model's canonical order.
    fn params(&self) -> Vec<T>;

    fn set_params(&mut self, params: &[T]);

    fn logit(&self, x: &[T]) -> T;

    /// `∂o/∂x` at `x`.
    fn logit_input_grad(&self, x: &[T]) -> Vec<T>;

    /// Adds `out_coeff · ∂o/∂θ + Σ_k dir_coeff[k] · ∂(∂o/∂x_k)/∂θ` to `grad`.
    fn accumulate_param_grad(&self, x: &[T], out_coeff: T, dir_coeff: Option<&[T]>, grad: &mut [T]);

    fn predict_one(&self, x: &[T]) -> T {
        crate::scalar::sigmoid(self.logit(x))
    }
}

/// Either classifier family, for code that handles models loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    Mlp(MlpModel<T>),
    Logistic(LogisticModel<T>),
}

impl<T: Scalar> Model<T> {
    /// Freshly initialized model: seeded uniform MLP weights at the default
    /// width, or an all-zero logistic regression.
    pub fn init(kind: ModelKind, n_features: usize, seed: u64) -> crate::error::Result<Self> {
        match kind {
            ModelKind::Mlp => Ok(Model::Mlp(init_mlp(n_features, default_hidden(n_features), seed)?)),
            ModelKind::Logistic => {
                if n_features == 0 {
                    return Err(crate::error::Error::Config("logistic regression needs at least one feature".into()));
                }
                Ok(Model::Logistic(LogisticModel::zeros(n_features)))
            }
        }
    }

    /// Initializes from `config.seed` and trains on `design`.
    pub fn fit(kind: ModelKind, design: &Design<T>, config: &TrainConfig) -> crate::error::Result<(Self, Vec<f64>)> {
        let model = Model::init(kind, design.n_features(), config.seed)?;
        train(model, design, config)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Mlp(_) => ModelKind::Mlp,
            Model::Logistic(_) => ModelKind::Logistic,
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Model::Mlp($m) => $e,
            Model::Logistic($m) => $e,
        }
    };
}

impl<T: Scalar> Classifier<T> for Model<T> {
    fn n_features(&self) -> usize {
        dispatch!(self, m => m.n_features())
    }

    fn n_params(&self) -> usize {
        dispatch!(self, m => m.n_params())
    }

    fn params(&self) -> Vec<T> {
        dispatch!(self, m => m.params())
    }

    fn set_params(&mut self, params: &[T]) {
        dispatch!(self, m => m.set_params(params))
    }

    fn logit(&self, x: &[T]) -> T {
        dispatch!(self, m => m.logit(x))
    }

    fn logit_input_grad(&self, x: &[T]) -> Vec<T> {
        dispatch!(self, m => m.logit_input_grad(x))
    }

    fn accumulate_param_grad(&self, x: &[T], out_coeff: T, dir_coeff: Option<&[T]>, grad: &mut [T]) {
        dispatch!(self, m => m.accumulate_param_grad(x, out_coeff, dir_coeff, grad))
    }
}

impl<T: Scalar> From<MlpModel<T>> for Model<T> {
    fn from(m: MlpModel<T>) -> Self {
        Model::Mlp(m)
    }
}

impl<T: Scalar> From<LogisticModel<T>> for Model<T> {
    fn from(m: LogisticModel<T>) -> Self {
        Model::Logistic(m)
    }
}
