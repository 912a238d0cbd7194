use anyhow::{bail, Result};
use ndarray::{Array2, Axis};
use procfair::mitigation::{detect_unfair_features, modify_model, retrain_without, UnfairFeatureSet};
use procfair::model::predict_labels;
use procfair::two_sample::pca_project;
use serde::Serialize;

use crate::config::RunConfig;
use crate::context::{write_text, LoadedModel, Prepared};

#[derive(Serialize)]
pub struct Disagreement {
    /// Points where the modified model differs from the original.
    pub modified: usize,
    /// Points where the retrained model differs from the original.
    pub retrained: usize,
    pub total: usize,
}

#[derive(Serialize)]
pub struct Scores {
    pub original: f64,
    pub modified: f64,
    pub retrained: f64,
}

#[derive(Serialize)]
pub struct BoundaryResults {
    pub model: String,
    pub unfair: UnfairFeatureSet,
    pub retrained_features: Vec<String>,
    pub explained_variance_ratio: Vec<f64>,
    pub resolution: usize,
    pub extent: [[f64; 2]; 2],
    pub grid: Disagreement,
    pub test_points: Disagreement,
    pub gpf_fae: Scores,
    pub grid_csv: String,
    pub points_csv: String,
}

fn count_diff(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Original, modified and retrained predictions on one PCA plane of the
/// test split: an `r × r` grid mapped back to input space, plus the test
/// points themselves.
pub fn boundary(cfg: &RunConfig, loaded: &LoadedModel) -> Result<BoundaryResults> {
    let r = cfg.boundary.resolution;
    if r < 2 {
        bail!("boundary resolution must be at least 2");
    }
    if !cfg.boundary.margin.is_finite() || cfg.boundary.margin < 0.0 {
        bail!("boundary margin must be non-negative");
    }
    let prep = Prepared::load(&cfg.data, cfg.seed)?;
    let columns = loaded.columns(&prep)?;
    if columns.len() < 2 {
        bail!("a decision plane needs a model with at least two inputs");
    }
    let detection = detect_unfair_features(&loaded.model, &columns, &prep.split, &cfg.audit, cfg.detect.beta)?;
    let unfair = detection.unfair;
    if unfair.is_empty() {
        bail!("no unfair features detected; nothing to compare against");
    }
    let retrained =
        retrain_without(&loaded.model, &columns, &prep.split, &unfair, &loaded.train_config(cfg), &cfg.audit)?;
    let modified = modify_model(&loaded.model, &columns, &prep.split, &unfair, &cfg.mitigate.modify, &cfg.audit)?;
    let kept: Vec<usize> = (0..columns.len()).filter(|k| !unfair.indices.contains(k)).collect();

    let test = prep.split.test.design(&columns)?;
    let (scores, pca) = pca_project(&test.x, 2)?;
    let m = cfg.boundary.margin;
    let extent = [0, 1].map(|c| {
        let col = scores.column(c);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        [lo - m, hi + m]
    });
    let step = |c: usize, i: usize| extent[c][0] + (extent[c][1] - extent[c][0]) * i as f64 / (r - 1) as f64;
    let plane = Array2::from_shape_fn((r * r, 2), |(k, c)| if c == 0 { step(0, k / r) } else { step(1, k % r) });
    let inputs = pca.inverse_transform(&plane);

    let predict_all = |x: &Array2<f64>| -> Result<[Vec<u8>; 3]> {
        Ok([
            predict_labels(&loaded.model, x)?,
            predict_labels(&modified.model, x)?,
            predict_labels(&retrained.model, &x.select(Axis(1), &kept))?,
        ])
    };
    let [g_orig, g_mod, g_ret] = predict_all(&inputs)?;
    let [t_orig, t_mod, t_ret] = predict_all(&test.x)?;

    let mut grid_text = String::from("pc1,pc2,original,modified,retrained\n");
    for k in 0..r * r {
        grid_text += &format!("{:.6},{:.6},{},{},{}\n", plane[[k, 0]], plane[[k, 1]], g_orig[k], g_mod[k], g_ret[k]);
    }
    let mut points_text = String::from("pc1,pc2,label,group,original,modified,retrained\n");
    let labels = prep.split.test.labels();
    for i in 0..test.n_rows() {
        points_text += &format!(
            "{:.6},{:.6},{},{},{},{},{}\n",
            scores[[i, 0]],
            scores[[i, 1]],
            labels[i],
            test.groups[i].label(),
            t_orig[i],
            t_mod[i],
            t_ret[i]
        );
    }
    let grid_csv = cfg.out.join("boundary_grid.csv");
    let points_csv = cfg.out.join("boundary_points.csv");
    write_text(&grid_csv, &grid_text)?;
    write_text(&points_csv, &points_text)?;

    Ok(BoundaryResults {
        model: loaded.path.display().to_string(),
        retrained_features: prep.names(&retrained.columns),
        unfair,
        explained_variance_ratio: pca.explained_variance_ratio.to_vec(),
        resolution: r,
        extent,
        grid: Disagreement {
            modified: count_diff(&g_orig, &g_mod),
            retrained: count_diff(&g_orig, &g_ret),
            total: r * r,
        },
        test_points: Disagreement {
            modified: count_diff(&t_orig, &t_mod),
            retrained: count_diff(&t_orig, &t_ret),
            total: test.n_rows(),
        },
        gpf_fae: Scores {
            original: modified.before.gpf_fae,
            modified: modified.after.gpf_fae,
            retrained: retrained.after.gpf_fae,
        },
        grid_csv: grid_csv.display().to_string(),
        points_csv: points_csv.display().to_string(),
    })
}
