use ndarray::Array1;

use super::Classifier;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Logistic regression `o(x) = w·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel<T> {
    pub w: Array1<T>,
    pub b: T,
}

impl<T: Scalar> LogisticModel<T> {
    pub fn new(w: Array1<T>, b: T) -> Self {
        LogisticModel { w, b }
    }

    pub fn zeros(n_features: usize) -> Self {
        LogisticModel { w: Array1::zeros(n_features), b: T::zero() }
    }

    /// Copy with the weight on `index` (the sensitive coordinate) replaced.
    pub fn set_sensitive_weight(&self, index: usize, w_s: T) -> Result<Self> {
        if index >= self.w.len() {
            return Err(Error::Config(format!("sensitive index {index} outside {} weights", self.w.len())));
        }
        let mut out = self.clone();
        out.w[index] = w_s;
        Ok(out)
    }
}

impl<T: Scalar> Classifier<T> for LogisticModel<T> {
    fn n_features(&self) -> usize {
        self.w.len()
    }

    fn n_params(&self) -> usize {
        self.w.len() + 1
    }

    fn params(&self) -> Vec<T> {
        let mut p: Vec<T> = self.w.to_vec();
        p.push(self.b);
        p
    }

    fn set_params(&mut self, params: &[T]) {
        assert_eq!(params.len(), self.n_params(), "parameter vector length");
        let d = self.w.len();
        self.w.as_slice_mut().expect("contiguous").copy_from_slice(&params[..d]);
        self.b = params[d];
    }

    fn logit(&self, x: &[T]) -> T {
        self.w.iter().zip(x).fold(self.b, |acc, (&w, &xi)| acc + w * xi)
    }

    fn logit_input_grad(&self, _x: &[T]) -> Vec<T> {
        self.w.to_vec()
    }

    fn accumulate_param_grad(&self, x: &[T], out_coeff: T, dir_coeff: Option<&[T]>, grad: &mut [T]) {
        let d = self.w.len();
        for l in 0..d {
            grad[l] = grad[l] + out_coeff * x[l];
        }
        if let Some(c) = dir_coeff {
            for l in 0..d {
                grad[l] = grad[l] + c[l];
            }
        }
        grad[d] = grad[d] + out_coeff;
    }
}
