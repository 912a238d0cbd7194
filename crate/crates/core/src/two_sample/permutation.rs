use std::cmp::Ordering;

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{pairwise_distances, resolve_bandwidth, KernelConfig};
use crate::error::{Error, Result};
use crate::rng::{derive_indexed, Rng};
use crate::scalar::Scalar;
use rand::SeedableRng;

pub const DEFAULT_PERMUTATIONS: usize = 1000;
pub const MIN_PERMUTATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationConfig {
    pub n_permutations: usize,
    pub seed: u64,
}

impl PermutationConfig {
    pub fn new(seed: u64) -> Self {
        PermutationConfig { n_permutations: DEFAULT_PERMUTATIONS, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_permutations < MIN_PERMUTATIONS {
            return Err(Error::Config(format!(
                "n_permutations = {} is below the minimum of {MIN_PERMUTATIONS}",
                self.n_permutations
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleTest {
    pub statistic: f64,
    pub p_value: f64,
    pub bandwidth: f64,
    pub n_permutations: usize,
}

fn check_samples<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> Result<()> {
    if a.nrows() < 2 || b.nrows() < 2 {
        return Err(Error::Shape {
            expected: "at least 2 rows per sample".into(),
            got: format!("{} and {}", a.nrows(), b.nrows()),
        });
    }
    if a.ncols() != b.ncols() {
        return Err(Error::Shape { expected: format!("{} columns", a.ncols()), got: b.ncols().to_string() });
    }
    Ok(())
}

/// `aᵀ K a` with `a_i = 1/n1` on the first sample and `−1/n2` on the second.
fn quadratic_form<T: Scalar>(k: &Array2<T>, in_first: &[bool], n1: usize, n2: usize) -> T {
    let w1 = T::one() / T::count(n1);
    let w2 = -T::one() / T::count(n2);
    let a: Vec<T> = in_first.iter().map(|&f| if f { w1 } else { w2 }).collect();
    let mut total = T::zero();
    for (i, row) in k.rows().into_iter().enumerate() {
        let s: T = row.iter().zip(&a).map(|(&kij, &aj)| kij * aj).sum();
        total = total + a[i] * s;
    }
    total
}

fn pooled_kernel<T: Scalar>(a: &Array2<T>, b: &Array2<T>, config: &KernelConfig) -> Result<(Array2<T>, T)> {
    let sigma = resolve_bandwidth(a, b, config)?;
    let pooled = concatenate(Axis(0), &[a.view(), b.view()]).expect("column counts checked");
    let k = pairwise_distances(&pooled, &pooled)?.mapv(|d| config.eval(d, sigma));
    Ok((k, sigma))
}

/// Biased squared MMD: `mean(K₁₁) + mean(K₂₂) − 2·mean(K₁₂)`.
pub fn mmd2<T: Scalar>(a: &Array2<T>, b: &Array2<T>, config: &KernelConfig) -> Result<T> {
    check_samples(a, b)?;
    let (k, _) = pooled_kernel(a, b, config)?;
    let labels: Vec<bool> = (0..a.nrows() + b.nrows()).map(|i| i < a.nrows()).collect();
    Ok(quadratic_form(&k, &labels, a.nrows(), b.nrows()).max(T::zero()))
}

fn lexicographic<T: Scalar>(x: &Array2<T>) -> Array2<T> {
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    order.sort_by(|&i, &j| {
        x.row(i)
            .iter()
            .zip(x.row(j).iter())
            .map(|(a, b)| a.partial_cmp(b).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    x.select(Axis(0), &order)
}

/// Permutation test on the biased MMD². The kernel matrix and bandwidth are
/// computed once on the pooled sample. Rows are put in canonical order first,
/// so the result does not depend on row order within either sample.
pub fn permutation_test<T: Scalar>(
    a: &Array2<T>,
    b: &Array2<T>,
    kernel: &KernelConfig,
    perm: &PermutationConfig,
) -> Result<TwoSampleTest> {
    check_samples(a, b)?;
    perm.validate()?;
    let (a, b) = (lexicographic(a), lexicographic(b));
    let (n1, n2) = (a.nrows(), b.nrows());
    let (k, sigma) = pooled_kernel(&a, &b, kernel)?;
    let base: Vec<bool> = (0..n1 + n2).map(|i| i < n1).collect();
    let observed = quadratic_form(&k, &base, n1, n2);

    let permuted: Vec<T> = (0..perm.n_permutations)
        .into_par_iter()
        .map(|p| {
            let mut rng = Rng::seed_from_u64(derive_indexed(perm.seed, "perm", p as u64));
            let mut labels = base.clone();
            labels.shuffle(&mut rng);
            quadratic_form(&k, &labels, n1, n2)
        })
        .collect();

    // rounding slack so exact ties (e.g. identical samples) count as ties
    let tol = T::epsilon() * T::of(4.0) * T::count(n1 + n2);
    let exceed = permuted.iter().filter(|&&s| s >= observed - tol).count();
    Ok(TwoSampleTest {
        statistic: observed.max(T::zero()).to_f64_lossy(),
        p_value: (1 + exceed) as f64 / (1 + perm.n_permutations) as f64,
        bandwidth: sigma.to_f64_lossy(),
        n_permutations: perm.n_permutations,
    })
}

/// The p-value of [`permutation_test`].
pub fn permutation_pvalue<T: Scalar>(
    a: &Array2<T>,
    b: &Array2<T>,
    kernel: &KernelConfig,
    perm: &PermutationConfig,
) -> Result<f64> {
    Ok(permutation_test(a, b, kernel, perm)?.p_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use crate::two_sample::{Bandwidth, KernelKind};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn normal(rows: usize, cols: usize, shift: f64, seed: u64, tag: &str) -> Array2<f64> {
        let mut rng = rng_for(seed, tag);
        Array2::from_shape_simple_fn((rows, cols), || {
            let z: f64 = StandardNormal.sample(&mut rng);
            z + shift
        })
    }

    #[test]
    fn identical_samples_have_zero_mmd() {
        let a = normal(30, 3, 0.0, 1, "a");
        assert_abs_diff_eq!(mmd2(&a, &a, &KernelConfig::default()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn separated_point_masses_approach_two() {
        let a = array![[0.0], [0.0]];
        let b = array![[100.0], [100.0]];
        let cfg = KernelConfig { kind: KernelKind::Exponential, bandwidth: Bandwidth::Fixed(1.0) };
        assert_abs_diff_eq!(mmd2(&a, &b, &cfg).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn shifted_normals_reject() {
        let a = normal(100, 1, 0.0, 2, "a");
        let b = normal(100, 1, 3.0, 2, "b");
        let t = permutation_test(&a, &b, &KernelConfig::default(), &PermutationConfig::new(0)).unwrap();
        // p at the floor means the statistic beats every null draw, so also the 95th percentile
        assert_eq!(t.p_value, 1.0 / 1001.0);
    }

    #[test]
    fn row_permuted_copy_gives_large_p() {
        let a = normal(50, 4, 0.0, 3, "a");
        let rev: Vec<usize> = (0..50).rev().collect();
        let b = a.select(Axis(0), &rev);
        let p = permutation_pvalue(&a, &b, &KernelConfig::default(), &PermutationConfig::new(5)).unwrap();
        assert!(p >= 0.5, "p = {p}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = normal(20, 2, 0.0, 4, "a");
        let b = normal(20, 2, 0.3, 4, "b");
        let cfg = KernelConfig::default();
        let p1 = permutation_pvalue(&a, &b, &cfg, &PermutationConfig::new(9)).unwrap();
        let p2 = permutation_pvalue(&a, &b, &cfg, &PermutationConfig::new(9)).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn rejects_tiny_inputs() {
        let cfg = KernelConfig::default();
        assert!(mmd2(&array![[0.0]], &array![[1.0], [2.0]], &cfg).is_err());
        let bad = PermutationConfig { n_permutations: 10, seed: 0 };
        assert!(permutation_pvalue(&array![[0.0], [1.0]], &array![[1.0], [2.0]], &cfg, &bad).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let a = normal(40, 2, 0.0, 6, "a").mapv(|v| v as f32);
        let b = normal(40, 2, 4.0, 6, "b").mapv(|v| v as f32);
        let p = permutation_pvalue(&a, &b, &KernelConfig::default(), &PermutationConfig::new(1)).unwrap();
        assert_eq!(p, 1.0 / 1001.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn symmetric_and_bounded(seed in 0u64..1000, shift in 0.0f64..1.5) {
            let a = normal(12, 2, 0.0, seed, "a");
            let b = normal(9, 2, shift, seed, "b");
            let cfg = KernelConfig::default();
            let ab = mmd2(&a, &b, &cfg).unwrap();
            let ba = mmd2(&b, &a, &cfg).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!(ab >= 0.0);
            let perm = PermutationConfig { n_permutations: 100, seed };
            let p = permutation_pvalue(&a, &b, &cfg, &perm).unwrap();
            prop_assert!((1.0 / 101.0..=1.0).contains(&p));
        }

        #[test]
        fn invariant_to_row_order_within_samples(seed in 0u64..1000) {
            let a = normal(10, 3, 0.0, seed, "a");
            let b = normal(10, 3, 0.5, seed, "b");
            let ra: Vec<usize> = (0..10).rev().collect();
            let rb: Vec<usize> = (0..10).map(|i| (i * 3) % 10).collect();
            let cfg = KernelConfig::default();
            let perm = PermutationConfig { n_permutations: 200, seed };
            let p = permutation_pvalue(&a, &b, &cfg, &perm).unwrap();
            let q = permutation_pvalue(&a.select(Axis(0), &ra), &b.select(Axis(0), &rb), &cfg, &perm).unwrap();
            prop_assert_eq!(p, q);
        }
    }
}
