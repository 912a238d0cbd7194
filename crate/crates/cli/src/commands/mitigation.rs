use anyhow::Result;
use procfair::fairness::{audit_with_details, AuditReport};
use procfair::mitigation::{
    alpha_sweep, detect_unfair_features, modify_model, retrain_without, AlphaSweepRow, Detection, ModifyTrace,
    RetrainSummary,
};
use serde::Serialize;

use crate::config::{MitigationMethod, RunConfig};
use crate::context::{save_model, write_text, LoadedModel, Prepared};

#[derive(Serialize)]
pub struct PairSummary {
    pub n: usize,
    pub mean_distance: f64,
    pub csv: String,
}

#[derive(Serialize)]
pub struct AuditResults {
    pub model: String,
    pub report: AuditReport,
    pub pairs: PairSummary,
    pub explanations: [String; 2],
}

pub fn audit(cfg: &RunConfig, loaded: &LoadedModel) -> Result<AuditResults> {
    let prep = Prepared::load(&cfg.data, cfg.seed)?;
    let columns = loaded.columns(&prep)?;
    let (report, gpf) = audit_with_details(&loaded.model, &columns, &prep.split, &cfg.audit)?;

    let e1 = cfg.out.join("explanations_advantaged.csv");
    let e2 = cfg.out.join("explanations_disadvantaged.csv");
    gpf.e1.write_csv(&e1)?;
    gpf.e2.write_csv(&e2)?;
    let pairs_csv = cfg.out.join("pairs.csv");
    let mut text = String::from("advantaged_row,disadvantaged_row,distance\n");
    for i in 0..gpf.pairs.len() {
        text += &format!("{},{},{:.6}\n", gpf.pairs.group1_rows[i], gpf.pairs.group2_rows[i], gpf.pairs.distances[i]);
    }
    write_text(&pairs_csv, &text)?;
    eprintln!("GPF_FAE = {:.3}, DP = {:.4}, accuracy = {:.4}", report.gpf_fae, report.dp, report.accuracy);
    Ok(AuditResults {
        model: loaded.path.display().to_string(),
        report,
        pairs: PairSummary {
            n: gpf.pairs.len(),
            mean_distance: gpf.pairs.mean_distance(),
            csv: pairs_csv.display().to_string(),
        },
        explanations: [e1.display().to_string(), e2.display().to_string()],
    })
}

#[derive(Serialize)]
pub struct DetectResults {
    pub model: String,
    #[serde(flatten)]
    pub detection: Detection,
}

pub fn detect(cfg: &RunConfig, loaded: &LoadedModel) -> Result<DetectResults> {
    let prep = Prepared::load(&cfg.data, cfg.seed)?;
    let columns = loaded.columns(&prep)?;
    let detection = detect_unfair_features(&loaded.model, &columns, &prep.split, &cfg.audit, cfg.detect.beta)?;
    eprintln!("unfair features: {:?}", detection.unfair.names);
    Ok(DetectResults { model: loaded.path.display().to_string(), detection })
}

#[derive(Serialize)]
pub struct ModifySummary {
    pub before: AuditReport,
    pub after: AuditReport,
    pub accuracy_drop: f64,
    pub initial_zeta: f64,
    pub final_zeta: f64,
    pub initial_bce: f64,
    pub final_bce: f64,
    pub trace_csv: String,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Nothing was flagged, so the model is left untouched.
    NothingToMitigate,
    Retrain(RetrainSummary),
    Modify(ModifySummary),
    AlphaSweep {
        rows: Vec<AlphaSweepRow>,
        csv: String,
    },
}

#[derive(Serialize)]
pub struct MitigateResults {
    pub model: String,
    pub detection: Detection,
    pub method: MitigationMethod,
    /// Path of the mitigated model, when one was produced.
    pub output_model: Option<String>,
    pub outcome: Outcome,
}

fn trace_csv(trace: &ModifyTrace) -> String {
    let mut text = String::from("step,bce,zeta\n");
    for (i, (b, z)) in trace.bce.iter().zip(&trace.zeta).enumerate() {
        text += &format!("{i},{b:.8e},{z:.8e}\n");
    }
    text
}

pub fn mitigate(cfg: &RunConfig, loaded: &LoadedModel) -> Result<MitigateResults> {
    let prep = Prepared::load(&cfg.data, cfg.seed)?;
    let columns = loaded.columns(&prep)?;
    let detection = detect_unfair_features(&loaded.model, &columns, &prep.split, &cfg.audit, cfg.detect.beta)?;
    let unfair = &detection.unfair;
    let method = cfg.mitigate.method;
    let mut output_model = None;
    let outcome = if unfair.is_empty() {
        Outcome::NothingToMitigate
    } else {
        match method {
            MitigationMethod::Retrain => {
                let tc = loaded.train_config(cfg);
                let out = retrain_without(&loaded.model, &columns, &prep.split, unfair, &tc, &cfg.audit)?;
                let path = cfg.out.join("retrained.json");
                save_model(
                    &path,
                    &out.model,
                    prep.names(&out.columns),
                    Some(out.train_config.clone()),
                    cfg.seed,
                    &cfg.data,
                )?;
                output_model = Some(path.display().to_string());
                Outcome::Retrain(out.summary())
            }
            MitigationMethod::Modify => match &cfg.mitigate.alphas {
                Some(alphas) => {
                    let rows = alpha_sweep(&loaded.model, &columns, &prep.split, unfair, alphas, &cfg.mitigate.modify)?;
                    let path = cfg.out.join("alpha_sweep.csv");
                    let mut text = format!("{}\n", AlphaSweepRow::CSV_HEADER);
                    for r in &rows {
                        text += &(r.csv_row() + "\n");
                    }
                    write_text(&path, &text)?;
                    Outcome::AlphaSweep { rows, csv: path.display().to_string() }
                }
                None => {
                    let out =
                        modify_model(&loaded.model, &columns, &prep.split, unfair, &cfg.mitigate.modify, &cfg.audit)?;
                    let path = cfg.out.join("modified.json");
                    save_model(
                        &path,
                        &out.model,
                        loaded.file.features.clone(),
                        loaded.file.training.clone(),
                        cfg.seed,
                        &cfg.data,
                    )?;
                    output_model = Some(path.display().to_string());
                    let trace_path = cfg.out.join("modify_trace.csv");
                    write_text(&trace_path, &trace_csv(&out.trace))?;
                    Outcome::Modify(ModifySummary {
                        accuracy_drop: out.before.accuracy - out.after.accuracy,
                        initial_zeta: out.trace.initial_zeta(),
                        final_zeta: out.trace.final_zeta(),
                        initial_bce: out.trace.bce.first().copied().unwrap_or(f64::NAN),
                        final_bce: out.trace.bce.last().copied().unwrap_or(f64::NAN),
                        before: out.before,
                        after: out.after,
                        trace_csv: trace_path.display().to_string(),
                    })
                }
            },
        }
    };
    Ok(MitigateResults { model: loaded.path.display().to_string(), detection, method, output_model, outcome })
}
