use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, dp, eo, eod};
use super::pairs::{select_pairs, PairSelection};
use crate::attribution::{explain_set, sample_background, ExplainedOutput, ExplanationSet, ShapConfig};
use crate::data::{Design, SplitDataset};
use crate::error::{Error, Result};
use crate::model::{predict_labels, Classifier};
use crate::scalar::Scalar;
use crate::two_sample::{permutation_test, KernelConfig, PermutationConfig, TwoSampleTest};

/// Everything produced while scoring one model on one pool.
#[derive(Debug, Clone)]
pub struct GpfResult<T> {
    /// The permutation p-value; larger means fairer.
    pub p_value: f64,
    pub test: TwoSampleTest,
    pub pairs: PairSelection,
    pub e1: ExplanationSet<T>,
    pub e2: ExplanationSet<T>,
}

/// Pairs `n` cross-group individuals from `pool`, explains both sides and
/// tests the two explanation sets for a distributional difference.
pub fn gpf_fae<T: Scalar, M: Classifier<T>>(
    model: &M,
    pool: &Design<T>,
    shap: &ShapConfig<T>,
    kernel: &KernelConfig,
    perm: &PermutationConfig,
    n: usize,
    pair_seed: u64,
) -> Result<GpfResult<T>> {
    if pool.n_features() != model.n_features() {
        return Err(Error::Shape {
            expected: format!("{} model inputs", model.n_features()),
            got: format!("pool with {} columns", pool.n_features()),
        });
    }
    let pairs = select_pairs(pool, n, pair_seed)?;
    gpf_from_pairs(model, pool, pairs, shap, kernel, perm)
}

/// The score for an existing pair selection on `pool`.
pub fn gpf_from_pairs<T: Scalar, M: Classifier<T>>(
    model: &M,
    pool: &Design<T>,
    pairs: PairSelection,
    shap: &ShapConfig<T>,
    kernel: &KernelConfig,
    perm: &PermutationConfig,
) -> Result<GpfResult<T>> {
    let x1 = pool.x.select(ndarray::Axis(0), &pairs.group1_rows);
    let x2 = pool.x.select(ndarray::Axis(0), &pairs.group2_rows);
    let (e1, e2) = rayon::join(
        || explain_set(model, &x1, &pool.feature_names, shap),
        || explain_set(model, &x2, &pool.feature_names, shap),
    );
    let (e1, e2) = (e1?, e2?);
    let test = permutation_test(&e1.values(), &e2.values(), kernel, perm)?;
    Ok(GpfResult { p_value: test.p_value, test, pairs, e1, e2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolChoice {
    /// Pairs are matched within the test split.
    Test,
    /// Pairs are matched within train and test together.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditConfig {
    pub n_pairs: usize,
    pub background_size: usize,
    /// Kernel SHAP coalition budget; `None` uses the default.
    pub n_coalitions: Option<usize>,
    pub ridge: f64,
    pub output: ExplainedOutput,
    pub kernel: KernelConfig,
    pub n_permutations: usize,
    pub pool: PoolChoice,
    pub procedural_threshold: f64,
    pub distributive_threshold: f64,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            n_pairs: 100,
            background_size: 100,
            n_coalitions: None,
            ridge: 1e-6,
            output: ExplainedOutput::default(),
            kernel: KernelConfig::default(),
            n_permutations: 1000,
            pool: PoolChoice::Test,
            procedural_threshold: 0.05,
            distributive_threshold: 0.10,
            seed: 0,
        }
    }
}

impl AuditConfig {
    pub fn with_seed(seed: u64) -> Self {
        AuditConfig { seed, ..Default::default() }
    }

    pub fn permutation(&self) -> PermutationConfig {
        PermutationConfig { n_permutations: self.n_permutations, seed: self.seed }
    }

    /// Kernel SHAP settings with a background drawn from `train_x`.
    pub fn shap<T: Scalar>(&self, train_x: &ndarray::Array2<T>) -> ShapConfig<T> {
        ShapConfig {
            background: sample_background(train_x, self.background_size, self.seed),
            n_coalitions: self.n_coalitions,
            ridge: self.ridge,
            output: self.output,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("procedural_threshold", self.procedural_threshold),
            ("distributive_threshold", self.distributive_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} must lie in [0, 1]")));
            }
        }
        if self.background_size == 0 {
            return Err(Error::Config("background_size must be positive".into()));
        }
        self.kernel.validate()?;
        self.permutation().validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fair,
    Unfair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub procedural: Verdict,
    pub dp: Verdict,
    pub eo: Verdict,
    pub eod: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub gpf_fae: f64,
    pub dp: f64,
    pub eo: f64,
    pub eod: f64,
    pub accuracy: f64,
    pub mean_pair_distance: f64,
    pub mmd2: f64,
    pub bandwidth: f64,
    pub pool_size: usize,
    pub features: Vec<String>,
    pub verdicts: Verdicts,
    pub config: AuditConfig,
}

impl AuditReport {
    pub const CSV_HEADER: &'static str = "gpf_fae,dp,eo,eod,accuracy,mean_pair_distance,mmd2,pool_size,procedural,seed";

    pub fn csv_row(&self) -> String {
        let v = |x: Verdict| if x == Verdict::Fair { "fair" } else { "unfair" };
        format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6e},{},{},{}",
            self.gpf_fae,
            self.dp,
            self.eo,
            self.eod,
            self.accuracy,
            self.mean_pair_distance,
            self.mmd2,
            self.pool_size,
            v(self.verdicts.procedural),
            self.config.seed
        )
    }
}

/// Accuracy and DP/EO/EOD on the test split, the procedural score on the
/// configured pool, and threshold verdicts. `columns` are the dataset columns
/// the model consumes, in order.
pub fn audit_with_details<T: Scalar, M: Classifier<T>>(
    model: &M,
    columns: &[usize],
    split: &SplitDataset<T>,
    config: &AuditConfig,
) -> Result<(AuditReport, GpfResult<T>)> {
    config.validate()?;
    let test = split.test.design(columns)?;
    let train = split.train.design(columns)?;
    let pool = match config.pool {
        PoolChoice::Test => test.clone(),
        PoolChoice::Full => split.full().design(columns)?,
    };

    let pred = predict_labels(model, &test.x)?;
    let truth: Vec<u8> = split.test.labels().to_vec();
    let groups = &test.groups;
    let dp_v = dp(&pred, groups)?;
    let eo_v = eo(&pred, &truth, groups)?;
    let eod_v = eod(&pred, &truth, groups)?;
    let acc = accuracy(&pred, &truth)?;

    let shap = config.shap(&train.x);
    let gpf = gpf_fae(model, &pool, &shap, &config.kernel, &config.permutation(), config.n_pairs, config.seed)?;

    let judge = |unfair: bool| if unfair { Verdict::Unfair } else { Verdict::Fair };
    let verdicts = Verdicts {
        procedural: judge(gpf.p_value <= config.procedural_threshold),
        dp: judge(dp_v > config.distributive_threshold),
        eo: judge(eo_v > config.distributive_threshold),
        eod: judge(eod_v > config.distributive_threshold),
    };
    let report = AuditReport {
        gpf_fae: gpf.p_value,
        dp: dp_v,
        eo: eo_v,
        eod: eod_v,
        accuracy: acc,
        mean_pair_distance: gpf.pairs.mean_distance(),
        mmd2: gpf.test.statistic,
        bandwidth: gpf.test.bandwidth,
        pool_size: pool.n_rows(),
        features: test.feature_names.clone(),
        verdicts,
        config: config.clone(),
    };
    Ok((report, gpf))
}

pub fn audit<T: Scalar, M: Classifier<T>>(
    model: &M,
    columns: &[usize],
    split: &SplitDataset<T>,
    config: &AuditConfig,
) -> Result<AuditReport> {
    Ok(audit_with_details(model, columns, split, config)?.0)
}
