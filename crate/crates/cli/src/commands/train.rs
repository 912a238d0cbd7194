use anyhow::Result;
use procfair::fairness::{accuracy, dp, eo, eod};
use procfair::model::{predict_labels, ModelKind};
use procfair::AnyModel;
use serde::Serialize;

use crate::config::RunConfig;
use crate::context::{save_model, train_config, Prepared};

#[derive(Serialize)]
pub struct TrainResults {
    pub model: String,
    pub kind: ModelKind,
    pub hidden: Option<usize>,
    pub features: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub epochs: usize,
    pub final_loss: Option<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub dp: f64,
    pub eo: f64,
    pub eod: f64,
}

pub fn train(cfg: &RunConfig) -> Result<TrainResults> {
    let prep = Prepared::load(&cfg.data, cfg.seed)?;
    let columns = prep.columns(&cfg.train.features)?;
    let names = prep.names(&columns);
    let tc = train_config(cfg, cfg.seed);
    let design = prep.split.train.design(&columns)?;
    let (model, trace) = AnyModel::fit(cfg.train.kind, &design, &tc)?;

    let train_acc = accuracy(&predict_labels(&model, &design.x)?, prep.split.train.labels())?;
    let test = prep.split.test.design(&columns)?;
    let pred = predict_labels(&model, &test.x)?;
    let truth = prep.split.test.labels();
    let test_acc = accuracy(&pred, truth)?;
    let (dp_v, eo_v, eod_v) =
        (dp(&pred, &test.groups)?, eo(&pred, truth, &test.groups)?, eod(&pred, truth, &test.groups)?);

    let path = cfg.out.join(format!("{}.json", cfg.train.name));
    save_model(&path, &model, names.clone(), Some(tc.clone()), cfg.seed, &cfg.data)?;
    eprintln!("{}: test accuracy {test_acc:.4}, DP {dp_v:.4}, EO {eo_v:.4}, EOD {eod_v:.4}", cfg.train.name);
    Ok(TrainResults {
        model: path.display().to_string(),
        kind: model.kind(),
        hidden: match &model {
            AnyModel::Mlp(m) => Some(m.hidden()),
            AnyModel::Logistic(_) => None,
        },
        features: names,
        train_rows: design.n_rows(),
        test_rows: test.n_rows(),
        epochs: tc.epochs,
        final_loss: trace.last().copied(),
        train_accuracy: train_acc,
        test_accuracy: test_acc,
        dp: dp_v,
        eo: eo_v,
        eod: eod_v,
    })
}
