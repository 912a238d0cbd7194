use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Group, TabularDataset};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Fitted mean and population standard deviation of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
    /// Zero-variance column; passed through unscaled.
    pub constant: bool,
}

/// Per-column z-score transform fitted on one dataset and reusable on another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub columns: Vec<ColumnStats>,
}

impl ZScore {
    pub fn fit<T: Scalar>(ds: &TabularDataset<T>) -> Self {
        let columns = ds
            .features()
            .columns()
            .into_iter()
            .zip(ds.feature_names())
            .map(|(col, name)| {
                let n = col.len() as f64;
                let mean = col.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n;
                let var = col.iter().map(|v| (v.to_f64_lossy() - mean).powi(2)).sum::<f64>() / n;
                let std = var.sqrt();
                let constant = !(std > 0.0);
                if constant {
                    log::warn!("column `{name}` has zero variance; left unscaled");
                }
                ColumnStats { mean, std, constant }
            })
            .collect();
        ZScore { columns }
    }

    pub fn transform_value<T: Scalar>(&self, column: usize, v: T) -> T {
        let s = self.columns[column];
        if s.constant {
            v
        } else {
            (v - T::of(s.mean)) / T::of(s.std)
        }
    }

    pub fn apply<T: Scalar>(&self, ds: &TabularDataset<T>) -> Result<TabularDataset<T>> {
        if self.columns.len() != ds.n_features() {
            return Err(Error::Shape {
                expected: format!("{} columns", self.columns.len()),
                got: ds.n_features().to_string(),
            });
        }
        let mut x: Array2<T> = ds.features().clone();
        for ((_, c), v) in x.indexed_iter_mut() {
            *v = self.transform_value(c, *v);
        }
        let s = ds.sensitive_index();
        let (adv, dis) = ds.group_values();
        let gv = (self.transform_value(s, adv), self.transform_value(s, dis));
        Ok(ds.with_features(x, gv, ds.provenance().to_string()))
    }
}

/// Fits a z-score transform on `ds` and applies it. Constant columns are
/// passed through and flagged in the returned statistics.
pub fn zscore_normalize<T: Scalar>(ds: &TabularDataset<T>) -> Result<(TabularDataset<T>, ZScore)> {
    let z = ZScore::fit(ds);
    Ok((z.apply(ds)?, z))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset<T> {
    pub train: TabularDataset<T>,
    pub test: TabularDataset<T>,
    pub ratio: f64,
    pub seed: u64,
}

impl<T: Scalar> SplitDataset<T> {
    /// Standardizes both parts with statistics fitted on the training part.
    pub fn standardized(&self) -> Result<(SplitDataset<T>, ZScore)> {
        let z = ZScore::fit(&self.train);
        Ok((
            SplitDataset {
                train: z.apply(&self.train)?,
                test: z.apply(&self.test)?,
                ratio: self.ratio,
                seed: self.seed,
            },
            z,
        ))
    }

    /// Train and test rows stacked back together (train first).
    pub fn full(&self) -> TabularDataset<T> {
        let x = ndarray::concatenate(ndarray::Axis(0), &[self.train.features().view(), self.test.features().view()])
            .expect("identical column counts");
        let mut labels = self.train.labels().to_vec();
        labels.extend_from_slice(self.test.labels());
        let mut groups = self.train.groups().to_vec();
        groups.extend_from_slice(self.test.groups());
        TabularDataset { features: x, labels, groups, ..self.train.clone() }
    }
}

/// Seeded random split: the first `⌈ratio·m⌉` rows of a uniform permutation
/// form the training part.
pub fn train_test_split<T: Scalar>(ds: &TabularDataset<T>, ratio: f64, seed: u64) -> Result<SplitDataset<T>> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} must lie in (0, 1)")));
    }
    let m = ds.n_rows();
    if m < 2 {
        return Err(Error::Dataset("need at least two rows to split".into()));
    }
    let n_train = ((ratio * m as f64) - 1e-9).ceil() as usize;
    if n_train == 0 || n_train >= m {
        return Err(Error::Config(format!("ratio {ratio} leaves an empty part for m={m}")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng_for(seed, "split"));
    let (train_rows, test_rows) = order.split_at(n_train);
    let train = ds.take_rows(train_rows);
    for g in [Group::Advantaged, Group::Disadvantaged] {
        if train.group_size(g) == 0 {
            return Err(Error::DegenerateSplit(format!("group {}", g.label())));
        }
    }
    for y in [0u8, 1] {
        if ds.labels().contains(&y) && !train.labels().contains(&y) {
            return Err(Error::DegenerateSplit(format!("label class {y}")));
        }
    }
    Ok(SplitDataset { train, test: ds.take_rows(test_rows), ratio, seed })
}
