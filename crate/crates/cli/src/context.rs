//! Data preparation and model files shared by the commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use procfair::data::{generate_synthetic, load_csv, oversample_to_dp, select_fair_features, train_test_split};
use procfair::model::{ModelFile, TrainConfig};
use procfair::{AnyModel, Dataset, Split};
use serde::{Deserialize, Serialize};

use crate::config::{DataConfig, DataSource, FeatureChoice, RunConfig};

/// Raw dataset and its standardized split.
pub struct Prepared {
    pub raw: Dataset,
    pub split: Split,
}

impl Prepared {
    pub fn load(data: &DataConfig, seed: u64) -> Result<Prepared> {
        let mut raw: Dataset = match &data.source {
            DataSource::Synthetic(s) => generate_synthetic(s)?,
            DataSource::Csv { path, schema } => {
                load_csv(path, schema).with_context(|| format!("loading {}", path.display()))?
            }
        };
        let split_seed = data.split_seed.unwrap_or(seed);
        if let Some(target) = data.oversample_dp {
            raw = oversample_to_dp(&raw, target, split_seed)?;
        }
        let (split, _) = train_test_split(&raw, data.split_ratio, split_seed)?.standardized()?;
        Ok(Prepared { raw, split })
    }

    pub fn columns(&self, choice: &FeatureChoice) -> Result<Vec<usize>> {
        Ok(match choice {
            FeatureChoice::All => self.raw.all_columns(),
            FeatureChoice::Fair { threshold } => select_fair_features(&self.raw, *threshold)?,
            FeatureChoice::Names(names) => {
                if names.is_empty() {
                    bail!("empty feature list");
                }
                self.raw.column_indices(names)?
            }
        })
    }

    pub fn names(&self, columns: &[usize]) -> Vec<String> {
        columns.iter().map(|&c| self.raw.feature_names()[c].clone()).collect()
    }

    pub fn sensitive(&self) -> usize {
        self.raw.sensitive_index()
    }
}

/// What a saved model needs to rebuild its data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelProvenance {
    pub data: DataConfig,
}

pub struct LoadedModel {
    pub path: PathBuf,
    pub file: ModelFile,
    pub model: AnyModel,
    pub provenance: Option<ModelProvenance>,
}

impl LoadedModel {
    pub fn read(path: &Path) -> Result<LoadedModel> {
        let file = ModelFile::read(path).with_context(|| format!("reading model {}", path.display()))?;
        let model = file.to_model()?;
        let provenance = match &file.metadata {
            serde_json::Value::Null => None,
            meta => serde_json::from_value(meta.clone()).ok(),
        };
        Ok(LoadedModel { path: path.to_path_buf(), file, model, provenance })
    }

    /// Dataset columns the model reads, by name.
    pub fn columns(&self, prepared: &Prepared) -> Result<Vec<usize>> {
        Ok(prepared.raw.column_indices(&self.file.features)?)
    }

    /// Training settings stored with the model, else the run's.
    pub fn train_config(&self, cfg: &RunConfig) -> TrainConfig {
        self.file.training.clone().unwrap_or_else(|| train_config(cfg, cfg.seed))
    }
}

pub fn train_config(cfg: &RunConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: cfg.train.epochs,
        learning_rate: cfg.train.learning_rate,
        dp_weight: cfg.train.dp_weight,
        seed,
        ..TrainConfig::default()
    }
}

pub fn save_model(
    path: &Path,
    model: &AnyModel,
    features: Vec<String>,
    training: Option<TrainConfig>,
    seed: u64,
    data: &DataConfig,
) -> Result<()> {
    let meta = serde_json::to_value(ModelProvenance { data: data.clone() })?;
    ModelFile::from_model(model, features, training, seed, meta).write(path)?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
