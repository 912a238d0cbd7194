//! Command-line surface. Every flag is optional so that unset flags fall
//! through to the config file and then to the defaults.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use procfair::attribution::ExplainedOutput;
use procfair::data::DatasetSchema;
use procfair::fairness::PoolChoice;
use procfair::model::ModelKind;
use procfair::two_sample::{Bandwidth, KernelKind};

use crate::config::{DataSource, FeatureChoice, MitigationMethod, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "procfair", version, about = "Audit and repair the procedural fairness of tabular classifiers")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Run seed; every random step derives from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON run configuration; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record wall-clock time in the report (makes reports differ between runs).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate the synthetic dataset with a schema sidecar.
    GenData(GenDataArgs),
    /// Train a model and save it as JSON.
    Train(TrainArgs),
    /// Audit a saved model: accuracy, DP/EO/EOD and the explanation-based score.
    Audit(AuditArgs),
    /// Find the features whose attributions differ between groups.
    Detect(DetectArgs),
    /// Remove unfair features by retraining, or suppress them by fine-tuning.
    Mitigate(MitigateArgs),
    /// Score logistic models with a growing weight on the sensitive feature.
    SweepWs(SweepWsArgs),
    /// Score fair and unfair models for several pair counts.
    SweepN(SweepNArgs),
    /// Score a model with pairs matched in nested pools of growing size.
    SweepPool(SweepPoolArgs),
    /// Decision boundaries of the original, modified and retrained models on a PCA plane.
    Boundary(BoundaryArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Mlp,
    Logistic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PoolArg {
    Test,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Exponential,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExplainArg {
    Logit,
    Probability,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Retrain,
    Modify,
}

#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    /// CSV dataset (default: synthetic data).
    #[arg(long, requires = "schema")]
    pub data: Option<PathBuf>,
    /// JSON schema sidecar naming the label and sensitive columns.
    #[arg(long, requires = "data")]
    pub schema: Option<PathBuf>,
    /// Fraction of rows in the training split.
    #[arg(long)]
    pub split_ratio: Option<f64>,
    /// Oversample advantaged positives until the dataset DP exceeds this.
    #[arg(long)]
    pub oversample_dp: Option<f64>,
    /// Synthetic dataset size.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Synthetic advantaged-group size.
    #[arg(long)]
    pub advantaged: Option<usize>,
}

impl DataArgs {
    pub fn overrides_source(&self) -> bool {
        self.data.is_some()
    }

    pub fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let (Some(path), Some(schema)) = (&self.data, &self.schema) {
            cfg.data.source = DataSource::Csv { path: path.clone(), schema: DatasetSchema::from_path(schema)? };
        }
        if let Some(r) = self.split_ratio {
            cfg.data.split_ratio = r;
        }
        if let Some(t) = self.oversample_dp {
            cfg.data.oversample_dp = Some(t);
        }
        if self.rows.is_some() || self.advantaged.is_some() {
            let DataSource::Synthetic(s) = &mut cfg.data.source else {
                bail!("--rows/--advantaged only apply to synthetic data");
            };
            if let Some(m) = self.rows {
                s.m = m;
            }
            if let Some(a) = self.advantaged {
                s.n_advantaged = a;
            }
        }
        Ok(())
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct TrainOpts {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// `all`, `fair`, or a comma-separated list of column names.
    #[arg(long)]
    pub features: Option<String>,
    /// Correlation threshold for `--features fair`.
    #[arg(long, default_value_t = 0.10)]
    pub fair_threshold: f64,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Weight of the soft DP penalty (negative amplifies group differences).
    #[arg(long, allow_hyphen_values = true)]
    pub dp_weight: Option<f64>,
    /// Model file stem.
    #[arg(long)]
    pub name: Option<String>,
}

impl TrainOpts {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let t = &mut cfg.train;
        if let Some(k) = self.kind {
            t.kind = match k {
                KindArg::Mlp => ModelKind::Mlp,
                KindArg::Logistic => ModelKind::Logistic,
            };
        }
        if let Some(f) = &self.features {
            t.features = FeatureChoice::parse(f, self.fair_threshold);
        }
        if let Some(e) = self.epochs {
            t.epochs = e;
        }
        if let Some(lr) = self.lr {
            t.learning_rate = lr;
        }
        if let Some(w) = self.dp_weight {
            t.dp_weight = w;
        }
        if let Some(n) = &self.name {
            t.name = n.clone();
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct AuditOpts {
    /// Rows searched for similar pairs.
    #[arg(long, value_enum)]
    pub pool: Option<PoolArg>,
    /// Number of matched pairs.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub permutations: Option<usize>,
    /// Background rows for Kernel SHAP.
    #[arg(long)]
    pub background: Option<usize>,
    /// Kernel SHAP coalition budget.
    #[arg(long)]
    pub coalitions: Option<usize>,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelArg>,
    /// Fixed kernel bandwidth (default: median heuristic).
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Model output the attributions explain.
    #[arg(long, value_enum)]
    pub explain: Option<ExplainArg>,
}

impl AuditOpts {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let a = &mut cfg.audit;
        if let Some(p) = self.pool {
            a.pool = match p {
                PoolArg::Test => PoolChoice::Test,
                PoolArg::Full => PoolChoice::Full,
            };
        }
        if let Some(n) = self.pairs {
            a.n_pairs = n;
        }
        if let Some(n) = self.permutations {
            a.n_permutations = n;
        }
        if let Some(n) = self.background {
            a.background_size = n;
        }
        if let Some(n) = self.coalitions {
            a.n_coalitions = Some(n);
        }
        if let Some(k) = self.kernel {
            a.kernel.kind = match k {
                KernelArg::Exponential => KernelKind::Exponential,
                KernelArg::Gaussian => KernelKind::Gaussian,
            };
        }
        if let Some(b) = self.bandwidth {
            a.kernel.bandwidth = Bandwidth::Fixed(b);
        }
        if let Some(e) = self.explain {
            a.output = match e {
                ExplainArg::Logit => ExplainedOutput::Logit,
                ExplainArg::Probability => ExplainedOutput::Probability,
            };
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModifyOpts {
    /// Explanation-loss weight.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fine-tuning steps.
    #[arg(long)]
    pub tau: Option<usize>,
    /// Fine-tuning learning rate.
    #[arg(long)]
    pub modify_lr: Option<f64>,
}

impl ModifyOpts {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let m = &mut cfg.mitigate.modify;
        if let Some(a) = self.alpha {
            m.alpha = a;
        }
        if let Some(t) = self.tau {
            m.tau = t;
        }
        if let Some(lr) = self.modify_lr {
            m.learning_rate = lr;
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArg {
    /// Model JSON written by `train` or `mitigate`.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainOpts,
}

#[derive(Args, Debug, Clone)]
pub struct AuditArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub audit: AuditOpts,
}

#[derive(Args, Debug, Clone)]
pub struct DetectArgs {
    #[command(flatten)]
    pub audit: AuditArgs,
    /// Per-feature significance level.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct MitigateArgs {
    #[command(flatten)]
    pub detect: DetectArgs,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[command(flatten)]
    pub modify: ModifyOpts,
    /// Comma-separated α values; runs a sweep of the modification instead.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepWsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainOpts,
    #[command(flatten)]
    pub audit: AuditOpts,
    /// Number of seeds, starting at the run seed.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub ws_upper: Option<f64>,
    #[arg(long)]
    pub ws_points: Option<usize>,
    /// Fair feature set: `fair` or a comma-separated list.
    #[arg(long)]
    pub fair_features: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepNArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainOpts,
    #[command(flatten)]
    pub audit: AuditOpts,
    #[arg(long)]
    pub seeds: Option<usize>,
    /// Comma-separated pair counts.
    #[arg(long, value_delimiter = ',')]
    pub pair_counts: Option<Vec<usize>>,
    #[arg(long)]
    pub fair_features: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SweepPoolArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainOpts,
    #[command(flatten)]
    pub audit: AuditOpts,
    /// Comma-separated pool sizes.
    #[arg(long, value_delimiter = ',')]
    pub pool_sizes: Option<Vec<usize>>,
}

#[derive(Args, Debug, Clone)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub detect: DetectArgs,
    #[command(flatten)]
    pub modify: ModifyOpts,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub margin: Option<f64>,
}

impl MitigateArgs {
    pub fn method(&self) -> Option<MitigationMethod> {
        self.method.map(|m| match m {
            MethodArg::Retrain => MitigationMethod::Retrain,
            MethodArg::Modify => MitigationMethod::Modify,
        })
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenData(_) => "gen-data",
            Command::Train(_) => "train",
            Command::Audit(_) => "audit",
            Command::Detect(_) => "detect",
            Command::Mitigate(_) => "mitigate",
            Command::SweepWs(_) => "sweep-ws",
            Command::SweepN(_) => "sweep-n",
            Command::SweepPool(_) => "sweep-pool",
            Command::Boundary(_) => "boundary",
        }
    }
}
