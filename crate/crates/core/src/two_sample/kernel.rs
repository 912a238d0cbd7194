use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{median, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `exp(−‖u−v‖/σ)`
    Exponential,
    /// `exp(−‖u−v‖²/(2σ²))`
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Median of the pooled nonzero pairwise distances.
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub bandwidth: Bandwidth,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { kind: KernelKind::Exponential, bandwidth: Bandwidth::Median }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if let Bandwidth::Fixed(s) = self.bandwidth {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Config(format!("fixed bandwidth {s} must be positive")));
            }
        }
        Ok(())
    }

    pub fn eval<T: Scalar>(&self, distance: T, sigma: T) -> T {
        match self.kind {
            KernelKind::Exponential => (-distance / sigma).exp(),
            KernelKind::Gaussian => (-(distance * distance) / (T::of(2.0) * sigma * sigma)).exp(),
        }
    }
}

/// Euclidean distance `‖u − v‖₂`.
pub fn euclidean<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt()
}

fn dist_view<T: Scalar>(u: ArrayView1<T>, v: ArrayView1<T>) -> T {
    u.iter().zip(v.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt()
}

/// `a × b` matrix of Euclidean distances between rows.
pub fn pairwise_distances<T: Scalar>(a: &Array2<T>, b: &Array2<T>) -> Result<Array2<T>> {
    if a.ncols() != b.ncols() {
        return Err(Error::Shape { expected: format!("{} columns", a.ncols()), got: b.ncols().to_string() });
    }
    Ok(Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| dist_view(a.row(i), b.row(j))))
}

/// Resolves the bandwidth on the pooled rows of `a` and `b`. Under the
/// median heuristic with no nonzero distance, falls back to `σ = 1`.
pub fn resolve_bandwidth<T: Scalar>(a: &Array2<T>, b: &Array2<T>, config: &KernelConfig) -> Result<T> {
    config.validate()?;
    match config.bandwidth {
        Bandwidth::Fixed(s) => Ok(T::of(s)),
        Bandwidth::Median => {
            if a.ncols() != b.ncols() {
                return Err(Error::Shape { expected: format!("{} columns", a.ncols()), got: b.ncols().to_string() });
            }
            let pooled: Vec<ArrayView1<T>> = a.rows().into_iter().chain(b.rows()).collect();
            let mut d = Vec::with_capacity(pooled.len() * pooled.len().saturating_sub(1) / 2);
            for i in 0..pooled.len() {
                for j in (i + 1)..pooled.len() {
                    let v = dist_view(pooled[i], pooled[j]);
                    if v > T::zero() {
                        d.push(v);
                    }
                }
            }
            match median(&d) {
                Some(s) => Ok(s),
                None => {
                    log::warn!("all pooled distances are zero; using bandwidth 1");
                    Ok(T::one())
                }
            }
        }
    }
}

/// Kernel matrix `K[i, j] = k(a_i, b_j)` with the bandwidth resolved on the
/// pooled sample.
pub fn kernel_matrix<T: Scalar>(a: &Array2<T>, b: &Array2<T>, config: &KernelConfig) -> Result<Array2<T>> {
    let sigma = resolve_bandwidth(a, b, config)?;
    Ok(pairwise_distances(a, b)?.mapv(|d| config.eval(d, sigma)))
}
