use ndarray::Array2;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::TabularDataset;
use crate::error::{Error, Result};
use crate::rng::{hash_hex, rng_for};
use crate::scalar::Scalar;

/// Synthetic benchmark with two neutral features, a binary sensitive
/// attribute and a noisy proxy of it.
///
/// Label rule: `t = w0 + w1·x1 + w2·x2 + w3·xs + w4·xp + N(0, noise_std²)`,
/// `y = 1` iff `sigmoid(t) ≥ 0.5`, i.e. `t ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub m: usize,
    pub n_advantaged: usize,
    pub weights: [f64; 5],
    pub proxy_std: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            m: 10_000,
            n_advantaged: 6_000,
            weights: [-0.2, 1.5, 0.5, 0.5, 0.5],
            proxy_std: 0.1,
            noise_std: 1.0,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.n_advantaged > 0 && self.n_advantaged < self.m) {
            return Err(Error::Config(format!(
                "n_advantaged must lie in (0, m); got {} of {}",
                self.n_advantaged, self.m
            )));
        }
        if !(self.proxy_std > 0.0) {
            return Err(Error::Config("proxy_std must be positive".into()));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::Config("noise_std must be non-negative".into()));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("weights must be finite".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hash_hex(&json)[..16].to_string()
    }

    /// The pre-noise score `t` without its noise term.
    pub fn score(&self, x1: f64, x2: f64, xs: f64, xp: f64) -> f64 {
        let w = self.weights;
        w[0] + w[1] * x1 + w[2] * x2 + w[3] * xs + w[4] * xp
    }
}

pub const SYNTHETIC_FEATURES: [&str; 4] = ["x1", "x2", "xs", "xp"];

/// Generates the synthetic dataset with columns `[x1, x2, xs, xp]` and
/// label `y`; the first `n_advantaged` rows have `xs = 1`.
pub fn generate_synthetic<T: Scalar>(config: &SyntheticConfig) -> Result<TabularDataset<T>> {
    config.validate()?;
    let mut rng = rng_for(config.seed, "synthetic");
    let proxy_noise = Normal::new(0.0, config.proxy_std).map_err(|e| Error::Config(e.to_string()))?;
    let mut x = Array2::<T>::zeros((config.m, 4));
    let mut labels = Vec::with_capacity(config.m);
    for i in 0..config.m {
        let x1: f64 = StandardNormal.sample(&mut rng);
        let x2: f64 = StandardNormal.sample(&mut rng);
        let xs = if i < config.n_advantaged { 1.0 } else { 0.0 };
        let xp = xs + proxy_noise.sample(&mut rng);
        let eps: f64 = StandardNormal.sample(&mut rng);
        let t = config.score(x1, x2, xs, xp) + config.noise_std * eps;
        labels.push(u8::from(t >= 0.0));
        for (j, v) in [x1, x2, xs, xp].into_iter().enumerate() {
            x[[i, j]] = T::of(v);
        }
    }
    TabularDataset::new(
        x,
        SYNTHETIC_FEATURES.iter().map(|s| s.to_string()).collect(),
        "y",
        labels,
        2,
        (T::one(), T::zero()),
        format!("synthetic seed={} config_hash={}", config.seed, config.hash()),
    )
}
