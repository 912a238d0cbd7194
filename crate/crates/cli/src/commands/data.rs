use anyhow::{bail, Result};
use procfair::data::{dataset_dp, generate_synthetic, oversample_to_dp, write_csv, DatasetSchema, Group};
use procfair::Dataset;
use serde::Serialize;

use crate::config::{DataSource, RunConfig};

#[derive(Serialize)]
pub struct GenDataResults {
    pub csv: String,
    pub schema: String,
    pub rows: usize,
    pub features: Vec<String>,
    pub n_advantaged: usize,
    pub n_disadvantaged: usize,
    pub dp: f64,
    pub provenance: String,
}

pub fn gen_data(cfg: &RunConfig) -> Result<GenDataResults> {
    let DataSource::Synthetic(synthetic) = &cfg.data.source else {
        bail!("gen-data only generates the synthetic dataset; drop --data");
    };
    let mut ds: Dataset = generate_synthetic(synthetic)?;
    if let Some(target) = cfg.data.oversample_dp {
        ds = oversample_to_dp(&ds, target, cfg.seed)?;
    }
    let csv = cfg.out.join("synthetic.csv");
    let schema = cfg.out.join("synthetic.schema.json");
    write_csv(&ds, &csv)?;
    DatasetSchema::for_dataset(&ds).write(&schema)?;
    let dp = dataset_dp(&ds)?;
    eprintln!("dataset DP = {dp:.4}");
    Ok(GenDataResults {
        csv: csv.display().to_string(),
        schema: schema.display().to_string(),
        rows: ds.n_rows(),
        features: ds.feature_names().to_vec(),
        n_advantaged: ds.group_size(Group::Advantaged),
        n_disadvantaged: ds.group_size(Group::Disadvantaged),
        dp,
        provenance: ds.provenance().to_string(),
    })
}
