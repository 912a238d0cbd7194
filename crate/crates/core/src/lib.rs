//! Auditing binary classifiers for group procedural fairness.
//!
//! The toolkit matches similar individuals across two groups, explains the
//! model's prediction for each of them with Kernel SHAP, and tests whether the
//! two explanation sets come from the same distribution with a kernel MMD
//! permutation test. The p-value is the fairness score. Features whose
//! explanations differ between groups can then be removed (retraining) or
//! penalised through an input-gradient loss (modification).
//!
//! Numerics are generic over `f32`/`f64`; the aliases at the crate root fix
//! `f64`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attribution;
pub mod data;
pub mod error;
pub mod fairness;
pub mod linalg;
pub mod mitigation;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod two_sample;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset = data::TabularDataset<f64>;
pub type Split = data::SplitDataset<f64>;
pub type Mlp = model::MlpModel<f64>;
pub type Logistic = model::LogisticModel<f64>;
pub type AnyModel = model::Model<f64>;
