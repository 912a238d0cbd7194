use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;
use crate::scalar::Scalar;
use ndarray::{s, Array1, Array2, Axis};

/// A fitted principal-component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca<T> {
    pub mean: Array1<T>,
    /// `k × d`, orthonormal rows. Each row's largest-magnitude loading is positive.
    pub components: Array2<T>,
    pub explained_variance: Array1<T>,
    pub explained_variance_ratio: Array1<T>,
}

impl<T: Scalar> Pca<T> {
    pub fn fit(x: &Array2<T>, k: usize) -> Result<Self> {
        let (m, d) = x.dim();
        if m < 2 {
            return Err(Error::Shape { expected: "at least 2 rows".into(), got: m.to_string() });
        }
        if k > d || k == 0 {
            return Err(Error::Config(format!("cannot take {k} components of {d}-dimensional data")));
        }
        let mean = x.mean_axis(Axis(0)).expect("m ≥ 2");
        let centered = x - &mean;
        let cov = centered.t().dot(&centered) / T::count(m - 1);
        let (values, vectors) = symmetric_eigen(&cov);
        let values = values.mapv(|v| v.max(T::zero()));
        let total: T = values.sum();

        let mut components = vectors.slice(s![.., ..k]).t().to_owned();
        for mut row in components.rows_mut() {
            let pivot = row.iter().copied().fold(T::zero(), |acc, v| if v.abs() > acc.abs() { v } else { acc });
            if pivot < T::zero() {
                row.mapv_inplace(|v| -v);
            }
        }
        let explained_variance = values.slice(s![..k]).to_owned();
        let explained_variance_ratio =
            if total > T::zero() { explained_variance.mapv(|v| v / total) } else { Array1::zeros(k) };
        Ok(Pca { mean, components, explained_variance, explained_variance_ratio })
    }

    pub fn transform(&self, x: &Array2<T>) -> Array2<T> {
        (x - &self.mean).dot(&self.components.t())
    }

    /// Maps plane coordinates back into the input space.
    pub fn inverse_transform(&self, scores: &Array2<T>) -> Array2<T> {
        scores.dot(&self.components) + &self.mean
    }
}

/// Projects centered `x` onto its top `k` principal directions.
pub fn pca_project<T: Scalar>(x: &Array2<T>, k: usize) -> Result<(Array2<T>, Pca<T>)> {
    let pca = Pca::fit(x, k)?;
    Ok((pca.transform(x), pca))
}
