use ndarray::{Array1, Array2};
use rand::Rng;

use super::Classifier;
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;

/// Two-layer perceptron `o(x) = w2·relu(W1 x + b1) + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel<T> {
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    pub w2: Array1<T>,
    pub b2: T,
}

/// Hidden width: 32, or 64 for inputs wider than 18 features.
pub fn default_hidden(n_features: usize) -> usize {
    if n_features > 18 {
        64
    } else {
        32
    }
}

/// Uniform(±1/√fan_in) weights, zero biases.
pub fn init_mlp<T: Scalar>(n_features: usize, hidden: usize, seed: u64) -> Result<MlpModel<T>> {
    if n_features == 0 || hidden == 0 {
        return Err(Error::Config(format!("MLP needs d ≥ 1 and h ≥ 1 (got d={n_features}, h={hidden})")));
    }
    let mut rng = rng_for(seed, "init-mlp");
    let a1 = 1.0 / (n_features as f64).sqrt();
    let a2 = 1.0 / (hidden as f64).sqrt();
    let w1 = Array2::from_shape_simple_fn((hidden, n_features), || T::of(rng.random_range(-a1..a1)));
    let w2 = Array1::from_shape_simple_fn(hidden, || T::of(rng.random_range(-a2..a2)));
    Ok(MlpModel { w1, b1: Array1::zeros(hidden), w2, b2: T::zero() })
}

impl<T: Scalar> MlpModel<T> {
    pub fn zeros(n_features: usize, hidden: usize) -> Self {
        MlpModel {
            w1: Array2::zeros((hidden, n_features)),
            b1: Array1::zeros(hidden),
            w2: Array1::zeros(hidden),
            b2: T::zero(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    /// Hidden pre-activations `W1 x + b1`.
    pub fn pre_activations(&self, x: &[T]) -> Vec<T> {
        let d = self.w1.ncols();
        let w1 = self.w1.as_slice().expect("standard layout");
        (0..self.hidden())
            .map(|j| {
                let row = &w1[j * d..(j + 1) * d];
                row.iter().zip(x).fold(self.b1[j], |acc, (&w, &xi)| acc + w * xi)
            })
            .collect()
    }
}

impl<T: Scalar> Classifier<T> for MlpModel<T> {
    fn n_features(&self) -> usize {
        self.w1.ncols()
    }

    fn n_params(&self) -> usize {
        let (h, d) = self.w1.dim();
        h * d + 2 * h + 1
    }

    fn params(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend(self.w1.iter().copied());
        p.extend(self.b1.iter().copied());
        p.extend(self.w2.iter().copied());
        p.push(self.b2);
        p
    }

    fn set_params(&mut self, params: &[T]) {
        assert_eq!(params.len(), self.n_params(), "parameter vector length");
        let (h, d) = self.w1.dim();
        let (w1, rest) = params.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(h);
        self.w1.as_slice_mut().expect("standard layout").copy_from_slice(w1);
        self.b1.as_slice_mut().expect("contiguous").copy_from_slice(b1);
        self.w2.as_slice_mut().expect("contiguous").copy_from_slice(w2);
        self.b2 = b2[0];
    }

    fn logit(&self, x: &[T]) -> T {
        self.pre_activations(x).into_iter().zip(self.w2.iter()).fold(self.b2, |acc, (z, &w)| {
            if z > T::zero() {
                acc + w * z
            } else {
                acc
            }
        })
    }

    fn logit_input_grad(&self, x: &[T]) -> Vec<T> {
        let d = self.n_features();
        let mut g = vec![T::zero(); d];
        for (j, z) in self.pre_activations(x).into_iter().enumerate() {
            if z > T::zero() {
                let w = self.w2[j];
                for (k, gk) in g.iter_mut().enumerate() {
                    *gk = *gk + w * self.w1[[j, k]];
                }
            }
        }
        g
    }

    fn accumulate_param_grad(&self, x: &[T], out_coeff: T, dir_coeff: Option<&[T]>, grad: &mut [T]) {
        let (h, d) = self.w1.dim();
        let z = self.pre_activations(x);
        let (g_w1, rest) = grad.split_at_mut(h * d);
        let (g_b1, rest) = rest.split_at_mut(h);
        let (g_w2, g_b2) = rest.split_at_mut(h);
        g_b2[0] = g_b2[0] + out_coeff;
        for j in 0..h {
            if !(z[j] > T::zero()) {
                // inactive unit: every partial through it is zero
                continue;
            }
            let w2j = self.w2[j];
            let back = out_coeff * w2j;
            g_b1[j] = g_b1[j] + back;
            let mut w2_acc = out_coeff * z[j];
            let row = &mut g_w1[j * d..(j + 1) * d];
            match dir_coeff {
                Some(c) => {
                    for l in 0..d {
                        row[l] = row[l] + back * x[l] + c[l] * w2j;
                        w2_acc = w2_acc + c[l] * self.w1[[j, l]];
                    }
                }
                None => {
                    for l in 0..d {
                        row[l] = row[l] + back * x[l];
                    }
                }
            }
            g_w2[j] = g_w2[j] + w2_acc;
        }
    }
}
