//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the models, explainers and tests are generic over.
///
/// Implemented for `f32` and `f64`. Configuration values (thresholds,
/// learning rates, seeds) stay `f64` and are converted with [`Scalar::of`].
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + ScalarOperand + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 constant representable in scalar type")
    }

    /// Converts a count into this scalar type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Sign with `sign(0) = 0`, the subgradient convention used for `|·|`.
    #[inline]
    fn sign0(self) -> Self {
        if self > Self::zero() {
            Self::one()
        } else if self < Self::zero() {
            -Self::one()
        } else {
            Self::zero()
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<T: Scalar>(z: T) -> T {
    let p = if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    };
    // keep p strictly inside (0, 1) once the exact value rounds to an endpoint
    p.max(T::min_positive_value()).min(T::one() - T::epsilon() / T::of(2.0))
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().copied().sum::<T>() / T::count(values.len()))
    }
}

/// Median of a slice (average of the two middle values for even lengths).
pub fn median<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        Some(v[mid])
    } else {
        Some((v[mid - 1] + v[mid]) / T::of(2.0))
    }
}

/// Population standard deviation.
pub fn std_dev<T: Scalar>(values: &[T]) -> Option<T> {
    let m = mean(values)?;
    let var = values.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::count(values.len());
    Some(var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0_f64), 0.5);
        assert!(sigmoid(-1000.0_f64) > 0.0);
        assert!(sigmoid(1000.0_f64) < 1.0);
        assert!(sigmoid(-200.0_f32) > 0.0 && sigmoid(40.0_f32) < 1.0);
        assert!((sigmoid(2.0_f32) + sigmoid(-2.0_f32) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median::<f64>(&[]), None);
    }

    #[test]
    fn sign0_convention() {
        assert_eq!(0.0_f64.sign0(), 0.0);
        assert_eq!((-3.0_f32).sign0(), -1.0);
    }
}
