//! Losses and their exact gradients.
//!
//! With `r_i = p_i − y_i` and `v_i = ∂o/∂x` at row `i`, the per-row BCE
//! input gradient is `r_i · v_i`. The explanation loss over unfair
//! features `U` is
//!
//! ```text
//! ζ = (1/m) Σ_i Σ_{k∈U} |r_i · v_ik|
//! ```
//!
//! and its parameter gradient splits into a term along `∂o/∂θ` (through
//! `r_i`) and a term along `∂v_ik/∂θ`:
//!
//! ```text
//! ∂ζ/∂θ = (1/m) Σ_i [ sign(r_i)·p_i(1−p_i)·Σ_k |v_ik| · ∂o_i/∂θ
//!                    + |r_i| · Σ_k sign(v_ik) · ∂v_ik/∂θ ]
//! ```
//!
//! ReLU kinks use the subgradient 0 and `|·|` uses `sign(0) = 0`.

use ndarray::Array2;
use rayon::prelude::*;

use super::Classifier;
use crate::data::{Design, Group};
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};

/// Probability clamp used by the BCE loss value.
pub const PROB_CLAMP: f64 = 1e-7;

/// Rows per deterministic reduction chunk.
const CHUNK: usize = 512;

fn check_dims<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>) -> Result<()> {
    if x.ncols() != model.n_features() {
        return Err(Error::Shape {
            expected: format!("{} input columns", model.n_features()),
            got: x.ncols().to_string(),
        });
    }
    Ok(())
}

fn row_slices<T: Scalar>(x: &Array2<T>) -> Vec<&[T]> {
    let d = x.ncols();
    let flat = x.as_slice().expect("standard-layout input matrix");
    if d == 0 {
        return vec![&flat[0..0]; x.nrows()];
    }
    flat.chunks(d).collect()
}

pub fn predict_proba<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>) -> Result<Vec<T>> {
    check_dims(model, x)?;
    let x = x.as_standard_layout();
    let x = x.to_owned();
    Ok(row_slices(&x).par_iter().map(|r| model.predict_one(r)).collect())
}

/// Hard labels with threshold `p ≥ 0.5`.
pub fn predict_labels<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>) -> Result<Vec<u8>> {
    let half = T::of(0.5);
    Ok(predict_proba(model, x)?.into_iter().map(|p| u8::from(p >= half)).collect())
}

fn clamped_bce<T: Scalar>(p: T, y: T) -> T {
    let lo = T::of(PROB_CLAMP);
    let p = p.max(lo).min(T::one() - lo);
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

/// Mean binary cross-entropy with probabilities clamped to `[1e-7, 1−1e-7]`.
pub fn bce_loss<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>, y: &[T]) -> Result<T> {
    let p = predict_proba(model, x)?;
    if p.len() != y.len() {
        return Err(Error::Shape { expected: format!("{} labels", p.len()), got: y.len().to_string() });
    }
    if p.is_empty() {
        return Err(Error::Dataset("empty input".into()));
    }
    Ok(p.iter().zip(y).map(|(&p, &y)| clamped_bce(p, y)).sum::<T>() / T::count(p.len()))
}

fn group_mean_gap<T: Scalar>(p: &[T], groups: &[Group]) -> Result<(T, usize, usize)> {
    let (mut s1, mut n1, mut s2, mut n2) = (T::zero(), 0usize, T::zero(), 0usize);
    for (&pi, &g) in p.iter().zip(groups) {
        match g {
            Group::Advantaged => {
                s1 = s1 + pi;
                n1 += 1;
            }
            Group::Disadvantaged => {
                s2 = s2 + pi;
                n2 += 1;
            }
        }
    }
    if n1 == 0 {
        return Err(Error::EmptyGroup(Group::Advantaged.label().into()));
    }
    if n2 == 0 {
        return Err(Error::EmptyGroup(Group::Disadvantaged.label().into()));
    }
    Ok((s1 / T::count(n1) - s2 / T::count(n2), n1, n2))
}

/// Differentiable demographic-parity surrogate: the gap between group means
/// of predicted probabilities.
pub fn soft_dp<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>, groups: &[Group]) -> Result<T> {
    let p = predict_proba(model, x)?;
    if p.len() != groups.len() {
        return Err(Error::Shape { expected: format!("{} groups", p.len()), got: groups.len().to_string() });
    }
    Ok(group_mean_gap(&p, groups)?.0.abs())
}

/// `∂L/∂x` for the mean BCE loss `L` over the `k` rows of `x`.
pub fn input_gradient<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>, y: &[T]) -> Result<Array2<T>> {
    check_dims(model, x)?;
    let x = x.as_standard_layout().to_owned();
    let k = T::count(x.nrows().max(1));
    let rows: Vec<Vec<T>> = row_slices(&x)
        .par_iter()
        .zip(y.par_iter())
        .map(|(r, &yi)| {
            let scale = (model.predict_one(r) - yi) / k;
            model.logit_input_grad(r).into_iter().map(|v| v * scale).collect()
        })
        .collect();
    let mut g = Array2::zeros(x.dim());
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            g[[i, j]] = v;
        }
    }
    Ok(g)
}

/// Explanation loss `ζ`: for each feature in `unfair`, the L¹ norm over rows
/// of the per-row BCE input gradient, divided by `m`, summed over features.
pub fn explanation_loss<T: Scalar, M: Classifier<T>>(model: &M, x: &Array2<T>, y: &[T], unfair: &[usize]) -> Result<T> {
    check_dims(model, x)?;
    if unfair.is_empty() || x.nrows() == 0 {
        return Ok(T::zero());
    }
    let x = x.as_standard_layout().to_owned();
    let total: T = row_slices(&x)
        .iter()
        .zip(y)
        .map(|(r, &yi)| {
            let resid = (model.predict_one(r) - yi).abs();
            let v = model.logit_input_grad(r);
            unfair.iter().map(|&k| resid * v[k].abs()).sum::<T>()
        })
        .sum();
    Ok(total / T::count(x.nrows()))
}

/// Weights of the optional objective terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveWeights<T> {
    /// `λ` on the soft DP term (negative values amplify unfairness).
    pub dp_weight: T,
    /// `α` on the explanation loss.
    pub explanation_weight: T,
    /// Feature indices the explanation loss penalizes.
    pub unfair: Vec<usize>,
}

impl<T: Scalar> ObjectiveWeights<T> {
    pub fn bce_only() -> Self {
        ObjectiveWeights { dp_weight: T::zero(), explanation_weight: T::zero(), unfair: Vec::new() }
    }

    pub fn with_dp(dp_weight: T) -> Self {
        ObjectiveWeights { dp_weight, ..Self::bce_only() }
    }

    pub fn with_explanation(alpha: T, unfair: Vec<usize>) -> Self {
        ObjectiveWeights { explanation_weight: alpha, unfair, ..Self::bce_only() }
    }

    fn uses_explanation(&self) -> bool {
        self.explanation_weight != T::zero() && !self.unfair.is_empty()
    }
}

/// Value of each objective component at the current parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue<T> {
    pub bce: T,
    pub soft_dp: T,
    pub zeta: T,
    pub total: T,
}

struct RowState<T> {
    p: T,
    v: Option<Vec<T>>,
}

/// Objective `BCE + λ·soft_dp + α·ζ` and its exact gradient w.r.t. the
/// model parameters. Soft DP and ζ are only evaluated when their weight is
/// nonzero (reported as zero otherwise).
pub fn objective_and_gradient<T: Scalar, M: Classifier<T>>(
    model: &M,
    design: &Design<T>,
    weights: &ObjectiveWeights<T>,
) -> Result<(ObjectiveValue<T>, Vec<T>)> {
    check_dims(model, &design.x)?;
    let m = design.n_rows();
    if m == 0 {
        return Err(Error::Dataset("empty design".into()));
    }
    if let Some(&k) = weights.unfair.iter().find(|&&k| k >= model.n_features()) {
        return Err(Error::Config(format!("unfair feature {k} outside model inputs")));
    }
    let x = design.x.as_standard_layout().to_owned();
    let rows = row_slices(&x);
    let y = design.y.as_slice().expect("contiguous labels");
    let use_zeta = weights.uses_explanation();
    let use_dp = weights.dp_weight != T::zero();

    let states: Vec<RowState<T>> = rows
        .par_iter()
        .map(|r| {
            let o = model.logit(r);
            RowState { p: sigmoid(o), v: use_zeta.then(|| model.logit_input_grad(r)) }
        })
        .collect();

    let mt = T::count(m);
    let bce = states.iter().zip(y).map(|(s, &yi)| clamped_bce(s.p, yi)).sum::<T>() / mt;

    let (gap, n1, n2) = if use_dp {
        let p: Vec<T> = states.iter().map(|s| s.p).collect();
        group_mean_gap(&p, &design.groups)?
    } else {
        (T::zero(), 1, 1)
    };
    let dp_sign = gap.sign0();

    let mut zeta = T::zero();
    let mut out_coeff = Vec::with_capacity(m);
    let mut dir_coeff: Vec<Option<Vec<T>>> = Vec::with_capacity(m);
    let alpha_m = weights.explanation_weight / mt;
    for (i, s) in states.iter().enumerate() {
        let r = s.p - y[i];
        let slope = s.p * (T::one() - s.p);
        let mut c = r / mt;
        if use_dp {
            let share = match design.groups[i] {
                Group::Advantaged => T::one() / T::count(n1),
                Group::Disadvantaged => -T::one() / T::count(n2),
            };
            c = c + weights.dp_weight * dp_sign * slope * share;
        }
        if let Some(v) = &s.v {
            let abs_r = r.abs();
            let mut abs_v_sum = T::zero();
            let mut dir = vec![T::zero(); v.len()];
            for &k in &weights.unfair {
                abs_v_sum = abs_v_sum + v[k].abs();
                dir[k] = alpha_m * abs_r * v[k].sign0();
            }
            zeta = zeta + abs_r * abs_v_sum;
            c = c + alpha_m * r.sign0() * slope * abs_v_sum;
            dir_coeff.push(Some(dir));
        } else {
            dir_coeff.push(None);
        }
        out_coeff.push(c);
    }
    zeta = zeta / mt;

    let n_params = model.n_params();
    let partials: Vec<Vec<T>> = (0..m)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = vec![T::zero(); n_params];
            for &i in chunk {
                model.accumulate_param_grad(rows[i], out_coeff[i], dir_coeff[i].as_deref(), &mut g);
            }
            g
        })
        .collect();
    let mut grad = vec![T::zero(); n_params];
    for part in partials {
        for (g, p) in grad.iter_mut().zip(part) {
            *g = *g + p;
        }
    }

    let soft_dp = gap.abs();
    let total = bce + weights.dp_weight * soft_dp + weights.explanation_weight * zeta;
    Ok((ObjectiveValue { bce, soft_dp, zeta, total }, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LogisticModel, MlpModel};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn bce_at_half_is_ln2() {
        let m = LogisticModel::<f64>::zeros(2);
        let x = array![[1.0, 2.0], [3.0, -1.0]];
        assert_abs_diff_eq!(bce_loss(&m, &x, &[1.0, 0.0]).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn bce_two_point_hand_case() {
        // logits chosen so that p = (0.8, 0.3)
        let m = LogisticModel::new(array![1.0], 0.0);
        let x = array![[(0.8f64 / 0.2).ln()], [(0.3f64 / 0.7).ln()]];
        let want = -(0.8f64.ln() + 0.7f64.ln()) / 2.0;
        assert_abs_diff_eq!(bce_loss(&m, &x, &[1.0, 0.0]).unwrap(), want, epsilon = 1e-12);
        assert_abs_diff_eq!(want, 0.2899, epsilon = 1e-4);
    }

    #[test]
    fn bce_clamp_floor() {
        let m = LogisticModel::new(array![100.0], 0.0);
        let x = array![[10.0], [-10.0]];
        let loss = bce_loss(&m, &x, &[1.0, 0.0]).unwrap();
        assert!(loss <= 1.6e-6 && loss > 0.0);
    }

    #[test]
    fn soft_dp_cases() {
        // p = sigmoid(x) with chosen logits: group means 0.9 vs 0.4
        let m = LogisticModel::new(array![1.0], 0.0);
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let x = array![[logit(0.9)], [logit(0.9)], [logit(0.4)], [logit(0.4)]];
        let g = [Group::Advantaged, Group::Advantaged, Group::Disadvantaged, Group::Disadvantaged];
        assert_abs_diff_eq!(soft_dp(&m, &x, &g).unwrap(), 0.5, epsilon = 1e-12);
        let same = array![[0.3], [0.1], [0.3], [0.1]];
        assert_eq!(soft_dp(&m, &same, &g).unwrap(), 0.0);
        assert!(soft_dp(&m, &same, &[Group::Advantaged; 4]).is_err());
    }

    #[test]
    fn input_gradient_zero_model_and_logistic_closed_form() {
        let x = array![[0.5, -1.0, 2.0], [1.5, 0.2, -0.3]];
        let y = [1.0, 0.0];
        let zero = MlpModel::<f64>::zeros(3, 4);
        assert!(input_gradient(&zero, &x, &y).unwrap().iter().all(|&g| g == 0.0));

        let lr = LogisticModel::new(array![0.7, -0.2, 0.4], 0.1);
        let g = input_gradient(&lr, &x, &y).unwrap();
        for i in 0..2 {
            let p = lr.predict_one(x.row(i).as_slice().unwrap());
            for j in 0..3 {
                assert_abs_diff_eq!(g[[i, j]], (p - y[i]) * lr.w[j] / 2.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn explanation_loss_cases() {
        let x = array![[0.5, -1.0], [1.5, 0.2], [-0.4, 0.9]];
        let y = [1.0, 0.0, 1.0];
        let lr = LogisticModel::new(array![0.7, -0.2], 0.1);
        assert_eq!(explanation_loss(&lr, &x, &y, &[]).unwrap(), 0.0);
        assert_eq!(explanation_loss(&MlpModel::zeros(2, 3), &x, &y, &[0, 1]).unwrap(), 0.0);
        let want: f64 = (0..3)
            .map(|i| {
                let p = lr.predict_one(x.row(i).as_slice().unwrap());
                ((p - y[i]) * 0.7f64).abs()
            })
            .sum::<f64>()
            / 3.0;
        assert_abs_diff_eq!(explanation_loss(&lr, &x, &y, &[0]).unwrap(), want, epsilon = 1e-15);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let lr = LogisticModel::<f64>::zeros(3);
        assert!(matches!(predict_proba(&lr, &array![[1.0, 2.0]]), Err(Error::Shape { .. })));
    }

    #[test]
    fn probabilities_stay_open_interval_and_labels_threshold() {
        let lr = LogisticModel::new(array![1.0], 0.0);
        let x = array![[-3.0], [0.0], [3.0]];
        let p = predict_proba(&lr, &x).unwrap();
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(predict_labels(&lr, &x).unwrap(), vec![0, 1, 1]);
    }
}
