use crate::data::Group;
use crate::error::{Error, Result};
use crate::model::Classifier;
use crate::scalar::Scalar;
use crate::two_sample::euclidean;

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape { expected: format!("{a} entries"), got: b.to_string() });
    }
    Ok(())
}

/// Positive-prediction rate within `group`, optionally restricted to rows with
/// the given true label.
fn rate(pred: &[u8], truth: Option<(&[u8], u8)>, groups: &[Group], group: Group, cell: &str) -> Result<f64> {
    let mut total = 0usize;
    let mut positive = 0usize;
    for (i, (&p, &g)) in pred.iter().zip(groups).enumerate() {
        if g != group {
            continue;
        }
        if let Some((y, want)) = truth {
            if y[i] != want {
                continue;
            }
        }
        total += 1;
        positive += usize::from(p == 1);
    }
    if total == 0 {
        return Err(Error::EmptyCell(format!("{cell} in the {} group", group.label())));
    }
    Ok(positive as f64 / total as f64)
}

/// Demographic parity gap: difference in positive-prediction rates.
pub fn dp(pred: &[u8], groups: &[Group]) -> Result<f64> {
    check_len(pred.len(), groups.len())?;
    let a = rate(pred, None, groups, Group::Advantaged, "rows")?;
    let b = rate(pred, None, groups, Group::Disadvantaged, "rows")?;
    Ok((a - b).abs())
}

fn tpr_fpr_gaps(pred: &[u8], truth: &[u8], groups: &[Group], need_fpr: bool) -> Result<(f64, f64)> {
    check_len(pred.len(), groups.len())?;
    check_len(pred.len(), truth.len())?;
    let tpr = |g| rate(pred, Some((truth, 1)), groups, g, "y=1");
    let tpr_gap = (tpr(Group::Advantaged)? - tpr(Group::Disadvantaged)?).abs();
    if !need_fpr {
        return Ok((tpr_gap, 0.0));
    }
    let fpr = |g| rate(pred, Some((truth, 0)), groups, g, "y=0");
    let fpr_gap = (fpr(Group::Advantaged)? - fpr(Group::Disadvantaged)?).abs();
    Ok((tpr_gap, fpr_gap))
}

/// Equal opportunity gap: difference in true-positive rates.
pub fn eo(pred: &[u8], truth: &[u8], groups: &[Group]) -> Result<f64> {
    Ok(tpr_fpr_gaps(pred, truth, groups, false)?.0)
}

/// Equalized odds gap: mean of the false-positive and true-positive rate gaps.
pub fn eod(pred: &[u8], truth: &[u8], groups: &[Group]) -> Result<f64> {
    let (tpr, fpr) = tpr_fpr_gaps(pred, truth, groups, true)?;
    Ok(0.5 * (tpr + fpr))
}

pub fn accuracy(pred: &[u8], truth: &[u8]) -> Result<f64> {
    check_len(pred.len(), truth.len())?;
    if pred.is_empty() {
        return Err(Error::Dataset("accuracy of an empty prediction set".into()));
    }
    Ok(pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / pred.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndividualFairness {
    /// `|ŷ_i − ŷ_j|` on thresholded predictions.
    pub value: f64,
    pub distance: f64,
    /// False when the two inputs are further apart than `ε`.
    pub applicable: bool,
}

pub fn individual_fairness<T: Scalar, M: Classifier<T>>(
    model: &M,
    xi: &[T],
    xj: &[T],
    epsilon: f64,
) -> IndividualFairness {
    let label = |x: &[T]| u8::from(model.predict_one(x) >= T::of(0.5));
    let distance = euclidean(xi, xj).to_f64_lossy();
    IndividualFairness { value: f64::from(label(xi).abs_diff(label(xj))), distance, applicable: distance <= epsilon }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LogisticModel;
    use ndarray::array;
    use proptest::prelude::*;
    use Group::{Advantaged as A, Disadvantaged as D};

    #[test]
    fn hand_enumerated_case() {
        let pred = [1, 1, 0, 0, 1, 0, 0, 0];
        let truth = [1, 0, 1, 0, 1, 0, 1, 0];
        let groups = [A, A, A, A, D, D, D, D];
        assert_eq!(dp(&pred, &groups).unwrap(), 0.25);
        assert_eq!(eo(&pred, &truth, &groups).unwrap(), 0.0);
        assert_eq!(eod(&pred, &truth, &groups).unwrap(), 0.25);
        assert_eq!(accuracy(&pred, &truth).unwrap(), 0.625);
    }

    #[test]
    fn symmetric_groups_score_zero() {
        let pred = [1, 0, 1, 1, 0, 1];
        let truth = [1, 0, 0, 1, 0, 0];
        let groups = [A, A, A, D, D, D];
        assert_eq!(dp(&pred, &groups).unwrap(), 0.0);
        assert_eq!(eo(&pred, &truth, &groups).unwrap(), 0.0);
        assert_eq!(eod(&pred, &truth, &groups).unwrap(), 0.0);
    }

    #[test]
    fn empty_cell_is_named() {
        let err = eo(&[1, 0], &[0, 0], &[A, D]).unwrap_err();
        assert!(err.to_string().contains("y=1"), "{err}");
        assert!(dp(&[1, 1], &[A, A]).is_err());
    }

    #[test]
    fn individual_fairness_contract() {
        let m = LogisticModel::new(array![1.0, -1.0], 0.0);
        let same = individual_fairness(&m, &[0.5, 0.1], &[0.5, 0.1], 0.0);
        assert_eq!((same.value, same.applicable), (0.0, true));
        let far = individual_fairness(&m, &[3.0, 0.0], &[0.0, 3.0], 1.0);
        assert!(!far.applicable);
        assert_eq!(far.value, 1.0);
        let flat = LogisticModel::new(array![0.0, 0.0], 2.0);
        assert_eq!(individual_fairness(&flat, &[3.0, 0.0], &[-5.0, 1.0], 10.0).value, 0.0);
    }

    fn cases() -> impl Strategy<Value = (Vec<u8>, Vec<u8>, Vec<Group>)> {
        (4usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(0u8..2, n),
                proptest::collection::vec(prop_oneof![Just(A), Just(D)], n),
            )
        })
    }

    proptest! {
        #[test]
        fn swap_and_permutation_invariance((pred, truth, groups) in cases(), rot in 0usize..40) {
            let swapped: Vec<Group> = groups.iter().map(|g| g.other()).collect();
            if let (Ok(a), Ok(b)) = (dp(&pred, &groups), dp(&pred, &swapped)) {
                prop_assert_eq!(a, b);
                prop_assert!((0.0..=1.0).contains(&a));
                let k = rot % pred.len();
                let mut p2 = pred.clone();
                let mut g2 = groups.clone();
                p2.rotate_left(k);
                g2.rotate_left(k);
                prop_assert!((dp(&p2, &g2).unwrap() - a).abs() < 1e-15);
            }
            if let (Ok(a), Ok(b)) = (eod(&pred, &truth, &groups), eod(&pred, &truth, &swapped)) {
                prop_assert_eq!(a, b);
                prop_assert_eq!(eo(&pred, &truth, &groups).unwrap(), eo(&pred, &truth, &swapped).unwrap());
                prop_assert!((0.0..=1.0).contains(&a));
            }
        }
    }
}
