//! Tabular datasets: ingestion, preprocessing, synthetic generation and the
//! dataset-level statistics used to build fair and unfair experiment setups.

mod io;
mod preprocess;
mod stats;
mod synthetic;

use std::collections::HashSet;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use io::{label_encode, load_csv, write_csv, DatasetSchema, RawTable};
pub use preprocess::{train_test_split, zscore_normalize, ColumnStats, SplitDataset, ZScore};
pub use stats::{dataset_dp, oversample_to_dp, pearson_correlation, select_fair_features};
pub use synthetic::{generate_synthetic, SyntheticConfig};

/// Sensitive-group membership of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    /// `s₁`, the advantaged group.
    Advantaged,
    /// `s₂`, the disadvantaged group.
    Disadvantaged,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Advantaged => "advantaged",
            Group::Disadvantaged => "disadvantaged",
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::Advantaged => Group::Disadvantaged,
            Group::Disadvantaged => Group::Advantaged,
        }
    }
}

/// A binary-labelled tabular dataset with one designated sensitive column.
///
/// The sensitive column stays inside the feature matrix; models that must
/// not see it are trained on a column subset via [`TabularDataset::design`].
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset<T> {
    features: Array2<T>,
    feature_names: Vec<String>,
    label_name: String,
    labels: Vec<u8>,
    sensitive_index: usize,
    group_values: (T, T),
    groups: Vec<Group>,
    provenance: String,
}

impl<T: Scalar> TabularDataset<T> {
    /// Builds a dataset, checking every invariant. Group membership is
    /// resolved by exact equality of the sensitive column with
    /// `group_values = (advantaged, disadvantaged)`.
    pub fn new(
        features: Array2<T>,
        feature_names: Vec<String>,
        label_name: impl Into<String>,
        labels: Vec<u8>,
        sensitive_index: usize,
        group_values: (T, T),
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let (m, d) = features.dim();
        if feature_names.len() != d {
            return Err(Error::Shape { expected: format!("{d} feature names"), got: feature_names.len().to_string() });
        }
        if labels.len() != m {
            return Err(Error::Shape { expected: format!("{m} labels"), got: labels.len().to_string() });
        }
        if sensitive_index >= d {
            return Err(Error::Dataset(format!("sensitive index {sensitive_index} out of range for {d} columns")));
        }
        if group_values.0 == group_values.1 {
            return Err(Error::Dataset("advantaged and disadvantaged values coincide".into()));
        }
        let groups = features
            .column(sensitive_index)
            .iter()
            .enumerate()
            .map(|(row, &v)| {
                if v == group_values.0 {
                    Ok(Group::Advantaged)
                } else if v == group_values.1 {
                    Ok(Group::Disadvantaged)
                } else {
                    Err(Error::Dataset(format!("row {row}: sensitive value {v} matches neither group value")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let ds = TabularDataset {
            features,
            feature_names,
            label_name: label_name.into(),
            labels,
            sensitive_index,
            group_values,
            groups,
            provenance: provenance.into(),
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        if let Some(bad) = self.labels.iter().find(|&&y| y > 1) {
            return Err(Error::NonBinaryLabel { column: self.label_name.clone(), detail: format!("value {bad}") });
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite feature value".into()));
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Dataset(format!("duplicate feature name `{name}`")));
            }
        }
        for g in [Group::Advantaged, Group::Disadvantaged] {
            if !self.groups.contains(&g) {
                return Err(Error::EmptyGroup(g.label().into()));
            }
        }
        Ok(())
    }

    /// Rebuilds a dataset from rows of `self`, carrying group membership.
    pub(crate) fn take_rows(&self, rows: &[usize]) -> Self {
        TabularDataset {
            features: self.features.select(Axis(0), rows),
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            sensitive_index: self.sensitive_index,
            group_values: self.group_values,
            groups: rows.iter().map(|&r| self.groups[r]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Row subset; fails if a group disappears.
    pub fn subset_rows(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return Err(Error::Dataset(format!("row {r} out of range")));
        }
        let ds = self.take_rows(rows);
        ds.validate()?;
        Ok(ds)
    }

    pub(crate) fn with_features(&self, features: Array2<T>, group_values: (T, T), provenance: String) -> Self {
        TabularDataset { features, group_values, provenance, ..self.clone() }
    }

    pub(crate) fn with_provenance(mut self, provenance: String) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn features(&self) -> &Array2<T> {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn sensitive_index(&self) -> usize {
        self.sensitive_index
    }

    pub fn sensitive_name(&self) -> &str {
        &self.feature_names[self.sensitive_index]
    }

    pub fn group_values(&self) -> (T, T) {
        self.group_values
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn group_size(&self, group: Group) -> usize {
        self.groups.iter().filter(|&&g| g == group).count()
    }

    /// Resolves column names to indices.
    pub fn column_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                let n = n.as_ref();
                self.feature_names.iter().position(|f| f == n).ok_or_else(|| Error::UnknownColumn(n.to_string()))
            })
            .collect()
    }

    pub fn all_columns(&self) -> Vec<usize> {
        (0..self.n_features()).collect()
    }

    /// Model-facing view: the chosen columns, labels as scalars, and groups.
    pub fn design(&self, columns: &[usize]) -> Result<Design<T>> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::Dataset(format!("column {c} out of range")));
        }
        Ok(Design {
            x: self.features.select(Axis(1), columns),
            y: self.labels.iter().map(|&y| if y == 1 { T::one() } else { T::zero() }).collect(),
            groups: self.groups.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
        })
    }
}

/// The matrix a model actually consumes, with aligned labels and groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Design<T> {
    pub x: Array2<T>,
    pub y: Array1<T>,
    pub groups: Vec<Group>,
    pub feature_names: Vec<String>,
}

impl<T: Scalar> Design<T> {
    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn rows(&self, rows: &[usize]) -> Design<T> {
        Design {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            groups: rows.iter().map(|&r| self.groups[r]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn group_rows(&self, group: Group) -> Vec<usize> {
        self.groups.iter().enumerate().filter(|(_, &g)| g == group).map(|(i, _)| i).collect()
    }
}
