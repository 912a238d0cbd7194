use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Classifier, LogisticModel, MlpModel, Model, TrainConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlp,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<usize>,
}

/// Flat JSON document describing a trained model.
///
/// Parameters are row-major `f64` arrays keyed by name (`w1`, `b1`, `w2`,
/// `b2` for the MLP; `w`, `b` for logistic regression). `serde_json`
/// prints the shortest decimal that parses back to the same `f64`, so a
/// save/load cycle is bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub kind: ModelKind,
    pub dims: Dims,
    /// Input columns, in the order the model consumes them.
    pub features: Vec<String>,
    pub parameters: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub training: Option<TrainConfig>,
    pub seed: u64,
    /// Free-form context (split seed and ratio, sensitive column, ...).
    #[serde(default)]
    pub metadata: serde_json::Value,
}

fn to_f64<T: Scalar>(v: impl IntoIterator<Item = T>) -> Vec<f64> {
    v.into_iter().map(|x| x.to_f64_lossy()).collect()
}

impl ModelFile {
    pub fn from_model<T: Scalar>(
        model: &Model<T>,
        features: Vec<String>,
        training: Option<TrainConfig>,
        seed: u64,
        metadata: serde_json::Value,
    ) -> Self {
        let mut parameters = BTreeMap::new();
        let dims = match model {
            Model::Mlp(m) => {
                parameters.insert("w1".into(), to_f64(m.w1.iter().copied()));
                parameters.insert("b1".into(), to_f64(m.b1.iter().copied()));
                parameters.insert("w2".into(), to_f64(m.w2.iter().copied()));
                parameters.insert("b2".into(), vec![m.b2.to_f64_lossy()]);
                Dims { n_features: m.n_features(), hidden: Some(m.hidden()) }
            }
            Model::Logistic(m) => {
                parameters.insert("w".into(), to_f64(m.w.iter().copied()));
                parameters.insert("b".into(), vec![m.b.to_f64_lossy()]);
                Dims { n_features: m.n_features(), hidden: None }
            }
        };
        ModelFile {
            format_version: FORMAT_VERSION,
            kind: model.kind(),
            dims,
            features,
            parameters,
            training,
            seed,
            metadata,
        }
    }

    fn param<T: Scalar>(&self, name: &str, len: usize) -> Result<Vec<T>> {
        let v =
            self.parameters.get(name).ok_or_else(|| Error::Config(format!("model file lacks parameter `{name}`")))?;
        if v.len() != len {
            return Err(Error::Shape { expected: format!("{len} values in `{name}`"), got: v.len().to_string() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("parameter `{name}` has non-finite values")));
        }
        Ok(v.iter().map(|&x| T::of(x)).collect())
    }

    pub fn to_model<T: Scalar>(&self) -> Result<Model<T>> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported model format version {}", self.format_version)));
        }
        let d = self.dims.n_features;
        if self.features.len() != d {
            return Err(Error::Shape { expected: format!("{d} feature names"), got: self.features.len().to_string() });
        }
        match self.kind {
            ModelKind::Mlp => {
                let h = self.dims.hidden.ok_or_else(|| Error::Config("MLP file lacks hidden size".into()))?;
                let w1 = Array2::from_shape_vec((h, d), self.param("w1", h * d)?)
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(Model::Mlp(MlpModel {
                    w1,
                    b1: Array1::from(self.param("b1", h)?),
                    w2: Array1::from(self.param("w2", h)?),
                    b2: self.param("b2", 1)?[0],
                }))
            }
            ModelKind::Logistic => {
                Ok(Model::Logistic(LogisticModel { w: Array1::from(self.param("w", d)?), b: self.param("b", 1)?[0] }))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
