use std::collections::BTreeSet;

use rand::Rng;

use super::{Group, TabularDataset};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;

fn positive_rate(labels: &[u8], groups: &[Group], group: Group) -> Result<f64> {
    let (mut n, mut pos) = (0usize, 0usize);
    for (&y, &g) in labels.iter().zip(groups) {
        if g == group {
            n += 1;
            pos += usize::from(y);
        }
    }
    if n == 0 {
        return Err(Error::EmptyGroup(group.label().into()));
    }
    Ok(pos as f64 / n as f64)
}

/// Demographic parity gap of the dataset's own labels.
pub fn dataset_dp<T: Scalar>(ds: &TabularDataset<T>) -> Result<f64> {
    let a = positive_rate(ds.labels(), ds.groups(), Group::Advantaged)?;
    let b = positive_rate(ds.labels(), ds.groups(), Group::Disadvantaged)?;
    Ok((a - b).abs())
}

/// Pearson correlation between a feature column and the sensitive column.
pub fn pearson_correlation<T: Scalar>(ds: &TabularDataset<T>, feature: usize) -> Result<f64> {
    if feature >= ds.n_features() {
        return Err(Error::Dataset(format!("feature {feature} out of range")));
    }
    let x = ds.features().column(feature);
    let s = ds.features().column(ds.sensitive_index());
    let n = x.len() as f64;
    let mx = x.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n;
    let ms = s.iter().map(|v| v.to_f64_lossy()).sum::<f64>() / n;
    let (mut sxx, mut sss, mut sxs) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(s.iter()) {
        let (da, db) = (a.to_f64_lossy() - mx, b.to_f64_lossy() - ms);
        sxx += da * da;
        sss += db * db;
        sxs += da * db;
    }
    if sxx <= 0.0 {
        return Err(Error::ZeroVariance(ds.feature_names()[feature].clone()));
    }
    if sss <= 0.0 {
        return Err(Error::ZeroVariance(ds.sensitive_name().to_string()));
    }
    Ok((sxs / (sxx.sqrt() * sss.sqrt())).clamp(-1.0, 1.0))
}

/// Non-sensitive features whose absolute correlation with the sensitive
/// attribute is below `threshold`. Zero-variance features are skipped.
pub fn select_fair_features<T: Scalar>(ds: &TabularDataset<T>, threshold: f64) -> Result<Vec<usize>> {
    let mut fair = Vec::new();
    for j in 0..ds.n_features() {
        if j == ds.sensitive_index() {
            continue;
        }
        match pearson_correlation(ds, j) {
            Ok(r) if r.abs() < threshold => fair.push(j),
            Ok(_) => {}
            Err(Error::ZeroVariance(name)) if name == ds.feature_names()[j] => {
                log::warn!("feature `{name}` is constant; not eligible as a fair feature");
            }
            Err(e) => return Err(e),
        }
    }
    if fair.is_empty() {
        return Err(Error::NoFairFeatures { threshold });
    }
    Ok(fair)
}

/// Appends seeded copies of advantaged positive rows, one at a time, until
/// the label DP first exceeds `target_dp`. At most `10·m` rows are appended.
pub fn oversample_to_dp<T: Scalar>(ds: &TabularDataset<T>, target_dp: f64, seed: u64) -> Result<TabularDataset<T>> {
    let start = dataset_dp(ds)?;
    if start >= target_dp {
        return Err(Error::Config(format!("dataset DP {start:.4} already reaches target {target_dp}")));
    }
    let donors: Vec<usize> =
        (0..ds.n_rows()).filter(|&i| ds.groups()[i] == Group::Advantaged && ds.labels()[i] == 1).collect();
    if donors.is_empty() {
        return Err(Error::Dataset("advantaged group has no positive rows to resample".into()));
    }
    let n_dis = ds.group_size(Group::Disadvantaged) as f64;
    let pos_dis =
        ds.labels().iter().zip(ds.groups()).filter(|(&y, &g)| y == 1 && g == Group::Disadvantaged).count() as f64;
    let rate_dis = pos_dis / n_dis;
    let mut n_adv = ds.group_size(Group::Advantaged) as f64;
    let mut pos_adv = (donors.len()) as f64;

    let cap = 10 * ds.n_rows();
    let mut rng = rng_for(seed, "oversample");
    let mut rows: Vec<usize> = (0..ds.n_rows()).collect();
    for _ in 0..cap {
        rows.push(donors[rng.random_range(0..donors.len())]);
        n_adv += 1.0;
        pos_adv += 1.0;
        if (pos_adv / n_adv - rate_dis).abs() > target_dp {
            let appended: BTreeSet<usize> = rows[ds.n_rows()..].iter().copied().collect();
            let provenance = format!(
                "{}; oversampled {} rows from {} donors to DP>{target_dp} (seed={seed})",
                ds.provenance(),
                rows.len() - ds.n_rows(),
                appended.len()
            );
            return Ok(ds.take_rows(&rows).with_provenance(provenance));
        }
    }
    Err(Error::Unreachable { target: target_dp, cap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticConfig};
    use ndarray::{array, Array2};

    fn labelled(groups: &[u8], labels: &[u8]) -> TabularDataset<f64> {
        let m = groups.len();
        let mut x = Array2::zeros((m, 2));
        for i in 0..m {
            x[[i, 0]] = i as f64;
            x[[i, 1]] = f64::from(groups[i]);
        }
        TabularDataset::new(x, vec!["f".into(), "s".into()], "y", labels.to_vec(), 1, (1.0, 0.0), "").unwrap()
    }

    #[test]
    fn dp_hand_enumeration() {
        // group A (s=1) labels [1,1]; group B (s=0) labels [1,0]
        let ds = labelled(&[1, 1, 0, 0], &[1, 1, 1, 0]);
        assert_eq!(dataset_dp(&ds).unwrap(), 0.5);
    }

    #[test]
    fn dp_zero_for_equal_rates_and_symmetric() {
        let ds = labelled(&[1, 1, 0, 0], &[1, 0, 0, 1]);
        assert_eq!(dataset_dp(&ds).unwrap(), 0.0);
        let swapped = labelled(&[0, 0, 1, 1], &[1, 1, 1, 0]);
        assert_eq!(dataset_dp(&swapped).unwrap(), 0.5);
    }

    #[test]
    fn self_correlation_is_one() {
        let ds = TabularDataset::new(
            array![[1.0, 1.0], [0.0, 0.0], [1.0, 1.0], [0.0, 0.0]],
            vec!["copy".into(), "s".into()],
            "y",
            vec![0, 1, 1, 0],
            1,
            (1.0, 0.0),
            "",
        )
        .unwrap();
        assert!((pearson_correlation(&ds, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(select_fair_features(&ds, 0.1), Err(Error::NoFairFeatures { .. })));
    }

    #[test]
    fn synthetic_correlations_and_fair_features() {
        let ds: TabularDataset<f64> = generate_synthetic(&SyntheticConfig::default()).unwrap();
        assert!(pearson_correlation(&ds, 3).unwrap() > 0.9);
        assert!(pearson_correlation(&ds, 0).unwrap().abs() < 0.05);
        assert_eq!(select_fair_features(&ds, 0.10).unwrap(), vec![0, 1]);
        assert_eq!(select_fair_features(&ds, 1.01).unwrap(), vec![0, 1, 3]);
    }

    #[test]
    fn oversampling_stops_at_first_crossing() {
        // 100 per group: rates 0.53 vs 0.50 → DP 0.03.
        let mut groups = vec![1u8; 100];
        groups.extend(vec![0u8; 100]);
        let mut labels: Vec<u8> = (0..100).map(|i| u8::from(i < 53)).collect();
        labels.extend((0..100).map(|i| u8::from(i < 50)));
        let ds = labelled(&groups, &labels);
        assert!((dataset_dp(&ds).unwrap() - 0.03).abs() < 1e-12);

        let out = oversample_to_dp(&ds, 0.10, 1).unwrap();
        let dp = dataset_dp(&out).unwrap();
        assert!(dp > 0.10 && dp <= 0.10 + 1.0 / 100.0, "dp={dp}");
        let trimmed = out.take_rows(&(0..out.n_rows() - 1).collect::<Vec<_>>());
        assert!(dataset_dp(&trimmed).unwrap() <= 0.10);
        assert_eq!(oversample_to_dp(&ds, 0.10, 1).unwrap(), out);
    }

    #[test]
    fn oversampling_preconditions() {
        let ds = labelled(&[1, 1, 0, 0], &[1, 1, 1, 0]);
        assert!(matches!(oversample_to_dp(&ds, 0.3, 0), Err(Error::Config(_))));
        let no_donors = labelled(&[1, 1, 0, 0], &[0, 0, 0, 0]);
        assert!(matches!(oversample_to_dp(&no_donors, 0.1, 0), Err(Error::Dataset(_))));
    }
}
