//! Resolved run configuration: defaults, overlaid by an optional JSON file,
//! overlaid by command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use procfair::data::{DatasetSchema, SyntheticConfig};
use procfair::fairness::AuditConfig;
use procfair::mitigation::{ModifyConfig, DEFAULT_BETA};
use procfair::model::ModelKind;
use serde::{Deserialize, Serialize};

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticConfig),
    Csv { path: PathBuf, schema: DatasetSchema },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    pub split_ratio: f64,
    /// Seed of the train/test split; `None` uses the run seed.
    pub split_seed: Option<u64>,
    /// Oversample advantaged positives until the dataset DP exceeds this.
    pub oversample_dp: Option<f64>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { source: DataSource::default(), split_ratio: 0.8, split_seed: None, oversample_dp: None }
    }
}

/// Feature subset a model reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureChoice {
    All,
    /// Non-sensitive features weakly correlated with the sensitive one.
    Fair {
        threshold: f64,
    },
    Names(Vec<String>),
}

impl FeatureChoice {
    pub fn parse(text: &str, threshold: f64) -> FeatureChoice {
        match text {
            "all" => FeatureChoice::All,
            "fair" => FeatureChoice::Fair { threshold },
            list => {
                FeatureChoice::Names(list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub kind: ModelKind,
    pub features: FeatureChoice,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Weight of the soft DP term; negative values build deliberately unfair models.
    pub dp_weight: f64,
    pub name: String,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            kind: ModelKind::Mlp,
            features: FeatureChoice::All,
            epochs: 300,
            learning_rate: 0.01,
            dp_weight: 0.0,
            name: "model".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    pub beta: f64,
}

impl Default for DetectSection {
    fn default() -> Self {
        DetectSection { beta: DEFAULT_BETA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MitigationMethod {
    Retrain,
    Modify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MitigateSection {
    pub method: MitigationMethod,
    pub modify: ModifyConfig,
    /// When set, runs the α sweep instead of a single modification.
    pub alphas: Option<Vec<f64>>,
}

impl Default for MitigateSection {
    fn default() -> Self {
        MitigateSection { method: MitigationMethod::Retrain, modify: ModifyConfig::default(), alphas: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Number of consecutive seeds, starting at the run seed.
    pub seeds: usize,
    /// Upper end of the sensitive-weight grid.
    pub ws_upper: f64,
    pub ws_points: usize,
    /// Features of the procedurally fair reference models; the w_s sweep adds
    /// the sensitive column to them.
    pub fair_features: FeatureChoice,
    pub pair_counts: Vec<usize>,
    pub pool_sizes: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            seeds: 10,
            ws_upper: 5.0,
            ws_points: 50,
            fair_features: FeatureChoice::Fair { threshold: 0.10 },
            pair_counts: vec![10, 20, 50, 100, 200, 500],
            pool_sizes: vec![200, 500, 1000, 2000, 5000, 10000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySection {
    /// Grid points per axis.
    pub resolution: usize,
    /// Padding around the projected data, in PCA units.
    pub margin: f64,
}

impl Default for BoundarySection {
    fn default() -> Self {
        BoundarySection { resolution: 100, margin: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
    pub data: DataConfig,
    pub train: TrainSection,
    pub audit: AuditConfig,
    pub detect: DetectSection,
    pub mitigate: MitigateSection,
    pub sweep: SweepSection,
    pub boundary: BoundarySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            threads: None,
            data: DataConfig::default(),
            train: TrainSection::default(),
            audit: AuditConfig::default(),
            detect: DetectSection::default(),
            mitigate: MitigateSection::default(),
            sweep: SweepSection::default(),
            boundary: BoundarySection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Pushes the run seed into every seeded section.
    pub fn propagate_seed(&mut self) {
        let seed = self.seed;
        if let DataSource::Synthetic(s) = &mut self.data.source {
            s.seed = seed;
        }
        self.data.split_seed = Some(seed);
        self.audit.seed = seed;
        self.mitigate.modify.seed = seed;
    }

    /// The same configuration for another seed (used by multi-seed sweeps).
    pub fn reseeded(&self, seed: u64) -> RunConfig {
        let mut cfg = RunConfig { seed, ..self.clone() };
        cfg.propagate_seed();
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 4, "audit": {"n_pairs": 50}}"#).unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.audit.n_pairs, 50);
        assert_eq!(cfg.audit.n_permutations, 1000);
        assert_eq!(cfg.train.epochs, 300);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 4}"#).is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg = RunConfig { seed: 7, ..Default::default() };
        cfg.propagate_seed();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn feature_choice_parsing() {
        assert_eq!(FeatureChoice::parse("all", 0.1), FeatureChoice::All);
        assert_eq!(FeatureChoice::parse("fair", 0.2), FeatureChoice::Fair { threshold: 0.2 });
        assert_eq!(FeatureChoice::parse("x1, x2", 0.1), FeatureChoice::Names(vec!["x1".into(), "x2".into()]));
    }
}
