use std::collections::BTreeMap;

use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rayon::prelude::*;

use super::{ExplainedOutput, Explanation, ExplanationSet, ShapConfig};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::model::Classifier;
use crate::rng::rng_for;
use crate::scalar::Scalar;

pub const DEFAULT_MAX_COALITIONS: usize = 2048;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A prepared Kernel SHAP explainer: background, coalition sample and the
/// factored regression system are shared by every row it explains, so
/// equal rows receive equal explanations.
///
/// The efficiency constraint `Σφ = f(x) − base` is enforced exactly by
/// eliminating the last coordinate before the weighted least squares.
#[derive(Debug, Clone)]
pub struct KernelShap<T> {
    background: Array2<T>,
    masks: Vec<Vec<bool>>,
    weights: Vec<T>,
    factor: Option<Array2<T>>,
}

impl<T: Scalar> KernelShap<T> {
    pub fn new(config: &ShapConfig<T>) -> Result<Self> {
        config.validate()?;
        let d = config.background.ncols();
        if d == 0 {
            return Err(Error::Config("cannot explain a model without features".into()));
        }
        let total = if d >= usize::BITS as usize - 1 { usize::MAX } else { (1usize << d) - 2 };
        let budget = config.n_coalitions.unwrap_or(total.min(DEFAULT_MAX_COALITIONS));
        let full = budget >= total;
        let (masks, weights) = if full { enumerate(d) } else { sample_coalitions(d, budget, config.seed) };
        // the fully enumerated system is well conditioned; ridge only guards sampled ones
        let ridge = if full { 0.0 } else { config.ridge };
        let factor = if d > 1 { Some(normal_factor(&masks, &weights, d, ridge)?) } else { None };
        Ok(KernelShap { background: config.background.clone(), masks, weights, factor })
    }

    pub fn n_features(&self) -> usize {
        self.background.ncols()
    }

    pub fn n_coalitions(&self) -> usize {
        self.masks.len()
    }

    /// Expected model output over the background.
    pub fn base_value<F: Fn(&[T]) -> T + Sync>(&self, f: &F) -> T {
        let k = T::count(self.background.nrows());
        self.background.rows().into_iter().map(|r| f(&r.to_vec())).sum::<T>() / k
    }

    fn coalition_value<F: Fn(&[T]) -> T + Sync>(&self, f: &F, x: &[T], mask: &[bool], scratch: &mut [T]) -> T {
        let mut acc = T::zero();
        for b in self.background.rows() {
            for j in 0..x.len() {
                scratch[j] = if mask[j] { x[j] } else { b[j] };
            }
            acc = acc + f(scratch);
        }
        acc / T::count(self.background.nrows())
    }

    pub fn explain<F: Fn(&[T]) -> T + Sync>(&self, f: &F, x: &[T]) -> Result<Explanation<T>> {
        self.explain_with_base(f, x, self.base_value(f))
    }

    pub fn explain_with_base<F: Fn(&[T]) -> T + Sync>(&self, f: &F, x: &[T], base: T) -> Result<Explanation<T>> {
        let d = self.n_features();
        if x.len() != d {
            return Err(Error::Shape { expected: format!("{d} features"), got: x.len().to_string() });
        }
        let target = f(x);
        let delta = target - base;
        let Some(factor) = &self.factor else {
            return Ok(Explanation { values: vec![delta], base_value: base, target });
        };
        let last = d - 1;
        let mut scratch = vec![T::zero(); d];
        let mut rhs = ndarray::Array1::<T>::zeros(last);
        for (mask, &w) in self.masks.iter().zip(&self.weights) {
            let v = self.coalition_value(f, x, mask, &mut scratch);
            let z_last = if mask[last] { T::one() } else { T::zero() };
            let t = v - base - z_last * delta;
            for j in 0..last {
                let z = if mask[j] { T::one() } else { T::zero() } - z_last;
                if z != T::zero() {
                    rhs[j] = rhs[j] + w * t * z;
                }
            }
        }
        let beta = cholesky_solve(factor, &rhs);
        let mut values: Vec<T> = beta.to_vec();
        let rest = delta - values.iter().copied().sum::<T>();
        values.push(rest);
        Ok(Explanation { values, base_value: base, target })
    }
}

fn enumerate<T: Scalar>(d: usize) -> (Vec<Vec<bool>>, Vec<T>) {
    let mut masks = Vec::new();
    let mut weights = Vec::new();
    for bits in 1u64..((1u64 << d) - 1) {
        let mask: Vec<bool> = (0..d).map(|j| bits & (1 << j) != 0).collect();
        let s = bits.count_ones() as usize;
        let w = (d - 1) as f64 / (binomial(d, s) * (s * (d - s)) as f64);
        masks.push(mask);
        weights.push(T::of(w));
    }
    (masks, weights)
}

/// Coalition sizes drawn from the Shapley-kernel size distribution, each
/// sample paired with its complement; duplicates merge into counts.
fn sample_coalitions<T: Scalar>(d: usize, budget: usize, seed: u64) -> (Vec<Vec<bool>>, Vec<T>) {
    let size_weights: Vec<f64> = (1..d).map(|s| (d - 1) as f64 / (s * (d - s)) as f64).collect();
    let sizes = WeightedIndex::new(&size_weights).expect("positive size weights");
    let mut rng = rng_for(seed, "coalitions");
    let mut counts: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let mut drawn = 0;
    while drawn < budget {
        let s = 1 + sizes.sample(&mut rng);
        let mut mask = vec![false; d];
        for j in sample(&mut rng, d, s) {
            mask[j] = true;
        }
        let complement: Vec<bool> = mask.iter().map(|b| !b).collect();
        *counts.entry(mask).or_default() += 1;
        *counts.entry(complement).or_default() += 1;
        drawn += 2;
    }
    counts.into_iter().map(|(m, c)| (m, T::count(c))).unzip()
}

fn normal_factor<T: Scalar>(masks: &[Vec<bool>], weights: &[T], d: usize, ridge: f64) -> Result<Array2<T>> {
    let last = d - 1;
    let mut a = Array2::<T>::zeros((last, last));
    for (mask, &w) in masks.iter().zip(weights) {
        let z_last = if mask[last] { T::one() } else { T::zero() };
        let z: Vec<T> = (0..last).map(|j| if mask[j] { T::one() } else { T::zero() } - z_last).collect();
        for i in 0..last {
            if z[i] == T::zero() {
                continue;
            }
            for j in 0..last {
                a[[i, j]] = a[[i, j]] + w * z[i] * z[j];
            }
        }
    }
    let mean_diag = (0..last).map(|i| a[[i, i]]).sum::<T>() / T::count(last);
    let lambda = T::of(ridge) * mean_diag;
    for i in 0..last {
        a[[i, i]] = a[[i, i]] + lambda;
    }
    cholesky(&a).map_err(|_| Error::Singular("kernel SHAP regression"))
}

/// Kernel SHAP attribution of `f` at `x`.
pub fn kernel_shap<T, F>(f: &F, x: &[T], config: &ShapConfig<T>) -> Result<Explanation<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    KernelShap::new(config)?.explain(f, x)
}

/// Explains each row of `x` (the configured model output) with one
/// shared background and coalition sample; rows are processed in parallel
/// and returned in input order.
pub fn explain_set<T, M>(
    model: &M,
    x: &Array2<T>,
    feature_names: &[String],
    config: &ShapConfig<T>,
) -> Result<ExplanationSet<T>>
where
    T: Scalar,
    M: Classifier<T>,
{
    if x.ncols() != model.n_features() || config.background.ncols() != model.n_features() {
        return Err(Error::Shape {
            expected: format!("{} model inputs", model.n_features()),
            got: format!("{} rows cols / {} background cols", x.ncols(), config.background.ncols()),
        });
    }
    let explainer = KernelShap::new(config)?;
    let output = config.output;
    let f = |z: &[T]| match output {
        ExplainedOutput::Probability => model.predict_one(z),
        ExplainedOutput::Logit => model.logit(z),
    };
    let base = explainer.base_value(&f);
    let rows: Vec<Vec<T>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let explanations = rows.par_iter().map(|r| explainer.explain_with_base(&f, r, base)).collect::<Result<Vec<_>>>()?;
    ExplanationSet::new(explanations, feature_names.to_vec())
}
