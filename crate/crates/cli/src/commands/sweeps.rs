use anyhow::{bail, Result};
use procfair::fairness::{audit, gpf_from_pairs, match_anchors, sample_anchors, AuditConfig};
use procfair::model::{train, LogisticModel};
use procfair::rng::rng_for;
use procfair::AnyModel;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::config::RunConfig;
use crate::context::{train_config, write_text, Prepared};

/// Least-squares non-increasing fit (pool adjacent violators, unit weights).
pub fn isotonic_decreasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.pop();
            let n = n1 + n2;
            *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
        }
    }
    blocks.into_iter().flat_map(|(m, n)| std::iter::repeat_n(m, n)).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Sample statistics (`std` with `n − 1`, zero for one value).
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std =
        if n > 1 { (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    Summary { mean, std, median, min: sorted[0], max: sorted[n - 1] }
}

fn seeds(cfg: &RunConfig) -> Result<Vec<u64>> {
    if cfg.sweep.seeds == 0 {
        bail!("sweep needs at least one seed");
    }
    Ok((0..cfg.sweep.seeds as u64).map(|i| cfg.seed + i).collect())
}

#[derive(Serialize)]
pub struct WsRow {
    pub w_s: f64,
    /// `w_s` divided by the grid's upper end.
    pub w_s_normalized: f64,
    pub gpf: Summary,
    /// Non-increasing least-squares fit of the medians.
    pub gpf_isotonic: f64,
    pub dp_mean: f64,
}

#[derive(Serialize)]
pub struct WsResults {
    pub seeds: Vec<u64>,
    pub features: Vec<String>,
    pub rows: Vec<WsRow>,
    pub csv: String,
    pub runs_csv: String,
}

pub fn ws_grid(upper: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        bail!("w_s grid needs at least one point");
    }
    if !upper.is_finite() || upper < 0.0 {
        bail!("w_s upper bound must be finite and non-negative");
    }
    if points == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..points).map(|j| upper * j as f64 / (points - 1) as f64).collect())
}

pub fn sweep_ws(cfg: &RunConfig) -> Result<WsResults> {
    let grid = ws_grid(cfg.sweep.ws_upper, cfg.sweep.ws_points)?;
    let seeds = seeds(cfg)?;
    let mut gpf = vec![Vec::with_capacity(seeds.len()); grid.len()];
    let mut dp = vec![Vec::with_capacity(seeds.len()); grid.len()];
    let mut runs = String::from("seed,w_s,gpf_fae,dp\n");
    let mut features = Vec::new();
    for &s in &seeds {
        let scfg = cfg.reseeded(s);
        let prep = Prepared::load(&scfg.data, s)?;
        let sensitive = prep.sensitive();
        let mut columns: Vec<usize> =
            prep.columns(&cfg.sweep.fair_features)?.into_iter().filter(|&c| c != sensitive).collect();
        columns.push(sensitive);
        features = prep.names(&columns);
        let design = prep.split.train.design(&columns)?;
        let (lr, _) = train(LogisticModel::zeros(columns.len()), &design, &train_config(&scfg, s))?;
        for (j, &w) in grid.iter().enumerate() {
            let model = lr.set_sensitive_weight(columns.len() - 1, w)?;
            let report = audit(&model, &columns, &prep.split, &scfg.audit)?;
            runs += &format!("{s},{w:.6},{:.6},{:.6}\n", report.gpf_fae, report.dp);
            gpf[j].push(report.gpf_fae);
            dp[j].push(report.dp);
        }
        log::info!("sweep-ws seed {s} done");
    }
    let summaries: Vec<Summary> = gpf.iter().map(|v| summarize(v)).collect();
    let iso = isotonic_decreasing(&summaries.iter().map(|s| s.median).collect::<Vec<_>>());
    let upper = cfg.sweep.ws_upper;
    let rows: Vec<WsRow> = grid
        .iter()
        .enumerate()
        .map(|(j, &w)| WsRow {
            w_s: w,
            w_s_normalized: if upper > 0.0 { w / upper } else { 0.0 },
            gpf: summaries[j],
            gpf_isotonic: iso[j],
            dp_mean: summarize(&dp[j]).mean,
        })
        .collect();

    let mut text = String::from("w_s,w_s_normalized,gpf_mean,gpf_std,gpf_median,gpf_isotonic,dp_mean\n");
    for r in &rows {
        text += &format!(
            "{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.w_s, r.w_s_normalized, r.gpf.mean, r.gpf.std, r.gpf.median, r.gpf_isotonic, r.dp_mean
        );
    }
    let csv = cfg.out.join("sweep_ws.csv");
    let runs_csv = cfg.out.join("sweep_ws_runs.csv");
    write_text(&csv, &text)?;
    write_text(&runs_csv, &runs)?;
    Ok(WsResults { seeds, features, rows, csv: csv.display().to_string(), runs_csv: runs_csv.display().to_string() })
}

#[derive(Serialize)]
pub struct NRow {
    pub model: &'static str,
    pub n: usize,
    pub gpf: Summary,
    /// Share of seeds judged procedurally unfair.
    pub unfair_rate: f64,
}

#[derive(Serialize)]
pub struct NResults {
    pub seeds: Vec<u64>,
    pub fair_features: Vec<String>,
    pub unfair_features: Vec<String>,
    pub rows: Vec<NRow>,
    pub csv: String,
}

pub fn sweep_n(cfg: &RunConfig) -> Result<NResults> {
    if cfg.sweep.pair_counts.is_empty() {
        bail!("no pair counts given");
    }
    let seeds = seeds(cfg)?;
    let ns = &cfg.sweep.pair_counts;
    // [model][n] -> per-seed p-values
    let mut gpf = vec![vec![Vec::new(); ns.len()]; 2];
    let (mut fair_names, mut unfair_names) = (Vec::new(), Vec::new());
    for &s in &seeds {
        let scfg = cfg.reseeded(s);
        let prep = Prepared::load(&scfg.data, s)?;
        let fair = prep.columns(&cfg.sweep.fair_features)?;
        let unfair = prep.columns(&cfg.train.features)?;
        fair_names = prep.names(&fair);
        unfair_names = prep.names(&unfair);
        let tc = train_config(&scfg, s);
        for (k, columns) in [fair, unfair].iter().enumerate() {
            let (model, _) = AnyModel::fit(cfg.train.kind, &prep.split.train.design(columns)?, &tc)?;
            for (j, &n) in ns.iter().enumerate() {
                let acfg = AuditConfig { n_pairs: n, ..scfg.audit.clone() };
                gpf[k][j].push(audit(&model, columns, &prep.split, &acfg)?.gpf_fae);
            }
        }
        log::info!("sweep-n seed {s} done");
    }
    let threshold = cfg.audit.procedural_threshold;
    let mut rows = Vec::new();
    for (k, label) in ["fair", "unfair"].into_iter().enumerate() {
        for (j, &n) in ns.iter().enumerate() {
            let v = &gpf[k][j];
            rows.push(NRow {
                model: label,
                n,
                gpf: summarize(v),
                unfair_rate: v.iter().filter(|&&p| p <= threshold).count() as f64 / v.len() as f64,
            });
        }
    }
    let mut text = String::from("model,n,gpf_mean,gpf_std,gpf_median,gpf_min,gpf_max,unfair_rate\n");
    for r in &rows {
        text += &format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            r.model, r.n, r.gpf.mean, r.gpf.std, r.gpf.median, r.gpf.min, r.gpf.max, r.unfair_rate
        );
    }
    let csv = cfg.out.join("sweep_n.csv");
    write_text(&csv, &text)?;
    Ok(NResults {
        seeds,
        fair_features: fair_names,
        unfair_features: unfair_names,
        rows,
        csv: csv.display().to_string(),
    })
}

#[derive(Serialize)]
pub struct PoolRow {
    pub pool_size: usize,
    pub mean_pair_distance: f64,
    pub gpf_fae: f64,
}

#[derive(Serialize)]
pub struct PoolResults {
    pub features: Vec<String>,
    pub n_pairs: usize,
    pub rows: Vec<PoolRow>,
    pub csv: String,
}

/// Pairs anchored in the smallest pool and re-matched in each larger
/// (nested) pool, so the mean pair distance cannot grow with the pool.
pub fn sweep_pool(cfg: &RunConfig) -> Result<PoolResults> {
    let mut sizes = cfg.sweep.pool_sizes.clone();
    if sizes.is_empty() {
        bail!("no pool sizes given");
    }
    sizes.sort_unstable();
    sizes.dedup();
    let n = cfg.audit.n_pairs;
    let prep = Prepared::load(&cfg.data, cfg.seed)?;
    let columns = prep.columns(&cfg.train.features)?;
    let full = prep.split.full().design(&columns)?;
    if sizes[0] < 2 * n {
        bail!("pool size {} is below twice the pair count ({n})", sizes[0]);
    }
    let largest = *sizes.last().unwrap();
    if largest > full.n_rows() {
        bail!("pool size {largest} exceeds the dataset ({} rows)", full.n_rows());
    }

    let train_design = prep.split.train.design(&columns)?;
    let (model, _) = AnyModel::fit(cfg.train.kind, &train_design, &train_config(cfg, cfg.seed))?;
    let shap = cfg.audit.shap(&train_design.x);
    let perm = cfg.audit.permutation();

    let mut order: Vec<usize> = (0..full.n_rows()).collect();
    order.shuffle(&mut rng_for(cfg.seed, "pool-order"));
    let (adv, dis) = sample_anchors(&full.rows(&order[..sizes[0]]), n, cfg.seed)?;
    let mut rows = Vec::new();
    for &size in &sizes {
        let pool = full.rows(&order[..size]);
        let pairs = match_anchors(&pool, &adv, &dis, cfg.seed)?;
        let res = gpf_from_pairs(&model, &pool, pairs, &shap, &cfg.audit.kernel, &perm)?;
        rows.push(PoolRow { pool_size: size, mean_pair_distance: res.pairs.mean_distance(), gpf_fae: res.p_value });
    }
    let mut text = String::from("pool_size,mean_pair_distance,gpf_fae\n");
    for r in &rows {
        text += &format!("{},{:.6},{:.6}\n", r.pool_size, r.mean_pair_distance, r.gpf_fae);
    }
    let csv = cfg.out.join("sweep_pool.csv");
    write_text(&csv, &text)?;
    Ok(PoolResults { features: prep.names(&columns), n_pairs: n, rows, csv: csv.display().to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_fit_is_non_increasing_and_keeps_sorted_input() {
        assert_eq!(isotonic_decreasing(&[3.0, 2.0, 1.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(isotonic_decreasing(&[1.0, 3.0]), vec![2.0, 2.0]);
        let fit = isotonic_decreasing(&[1.0, 0.2, 0.6, 0.1, 0.3, 0.0]);
        assert!(fit.windows(2).all(|w| w[0] >= w[1]));
        assert!((fit.iter().sum::<f64>() - 2.2).abs() < 1e-12);
        assert!(isotonic_decreasing(&[]).is_empty());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(summarize(&[7.0]).std, 0.0);
    }

    #[test]
    fn grid_endpoints() {
        assert_eq!(ws_grid(5.0, 1).unwrap(), vec![0.0]);
        let g = ws_grid(5.0, 50).unwrap();
        assert_eq!((g[0], g[49], g.len()), (0.0, 5.0, 50));
        assert!(ws_grid(5.0, 0).is_err());
    }
}
