use ndarray::Array2;

use super::Explanation;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_EXACT_FEATURES: usize = 15;

/// Exact Shapley values by enumerating all `2^d` coalitions.
pub fn exact_shapley<T, F>(f: &F, x: &[T], background: &Array2<T>) -> Result<Explanation<T>>
where
    T: Scalar,
    F: Fn(&[T]) -> T + Sync,
{
    let d = x.len();
    if d > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures(d));
    }
    if background.ncols() != d || background.nrows() == 0 {
        return Err(Error::Shape {
            expected: format!("non-empty k×{d} background"),
            got: format!("{:?}", background.dim()),
        });
    }
    let k = T::count(background.nrows());
    let mut scratch = vec![T::zero(); d];
    let value: Vec<T> = (0u32..(1u32 << d))
        .map(|mask| {
            let mut acc = T::zero();
            for b in background.rows() {
                for j in 0..d {
                    scratch[j] = if mask & (1 << j) != 0 { x[j] } else { b[j] };
                }
                acc = acc + f(&scratch);
            }
            acc / k
        })
        .collect();

    // weight(s) = s!(d−s−1)!/d!
    let fact: Vec<f64> = (0..=d)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    let weight: Vec<T> = (0..d).map(|s| T::of(fact[s] * fact[d - s - 1] / fact[d])).collect();

    let mut values = vec![T::zero(); d];
    for (j, phi) in values.iter_mut().enumerate() {
        let bit = 1u32 << j;
        for mask in 0u32..(1u32 << d) {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                *phi = *phi + weight[s] * (value[(mask | bit) as usize] - value[mask as usize]);
            }
        }
    }
    Ok(Explanation { values, base_value: value[0], target: value[(1usize << d) - 1] })
}
