use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Design, Group};
use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::scalar::Scalar;
use crate::two_sample::euclidean;

/// Matched cross-group pairs. Entry `i` of `group1_rows` (advantaged) and
/// `group2_rows` (disadvantaged) form one pair, at distance `distances[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSelection {
    pub group1_rows: Vec<usize>,
    pub group2_rows: Vec<usize>,
    pub distances: Vec<f64>,
    pub pool_size: usize,
    pub seed: u64,
}

impl PairSelection {
    pub fn len(&self) -> usize {
        self.group1_rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group1_rows.is_empty()
    }

    pub fn mean_distance(&self) -> f64 {
        if self.distances.is_empty() {
            return 0.0;
        }
        self.distances.iter().sum::<f64>() / self.distances.len() as f64
    }
}

/// Nearest candidate to `anchor`, lowest index on ties.
fn nearest<T: Scalar>(pool: &Design<T>, anchor: usize, candidates: &[usize]) -> (usize, f64) {
    let a = pool.x.row(anchor).to_vec();
    let mut best = (usize::MAX, T::infinity());
    let mut buf = vec![T::zero(); a.len()];
    for &c in candidates {
        for (b, v) in buf.iter_mut().zip(pool.x.row(c)) {
            *b = *v;
        }
        let d = euclidean(&a, &buf);
        if d < best.1 {
            best = (c, d);
        }
    }
    (best.0, best.1.to_f64_lossy())
}

/// Anchor rows for `n` pairs: `⌊n/2⌋` advantaged and `n − ⌊n/2⌋`
/// disadvantaged rows, drawn without replacement.
pub fn sample_anchors<T: Scalar>(pool: &Design<T>, n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 pairs, got {n}")));
    }
    let adv = pool.group_rows(Group::Advantaged);
    let dis = pool.group_rows(Group::Disadvantaged);
    let n1 = n / 2;
    let n2 = n - n1;
    for (group, rows, need) in [(Group::Advantaged, &adv, n1), (Group::Disadvantaged, &dis, n2)] {
        if rows.len() < need {
            return Err(Error::GroupTooSmall { group: group.label(), available: rows.len(), required: need });
        }
    }
    let mut rng = rng_for(seed, "pairs");
    let a1 = sample(&mut rng, adv.len(), n1).into_iter().map(|i| adv[i]).collect();
    let a2 = sample(&mut rng, dis.len(), n2).into_iter().map(|i| dis[i]).collect();
    Ok((a1, a2))
}

/// Pairs every anchor with its nearest neighbour from the other group of
/// `pool` (partners may repeat).
pub fn match_anchors<T: Scalar>(
    pool: &Design<T>,
    advantaged_anchors: &[usize],
    disadvantaged_anchors: &[usize],
    seed: u64,
) -> Result<PairSelection> {
    for &a in advantaged_anchors.iter().chain(disadvantaged_anchors) {
        if a >= pool.n_rows() {
            return Err(Error::Shape { expected: format!("anchor rows below {}", pool.n_rows()), got: a.to_string() });
        }
    }
    let check = |rows: &[usize], g: Group| {
        if rows.iter().any(|&r| pool.groups[r] != g) {
            Err(Error::Config(format!("anchor outside the {} group", g.label())))
        } else {
            Ok(())
        }
    };
    check(advantaged_anchors, Group::Advantaged)?;
    check(disadvantaged_anchors, Group::Disadvantaged)?;
    let adv = pool.group_rows(Group::Advantaged);
    let dis = pool.group_rows(Group::Disadvantaged);
    if (!advantaged_anchors.is_empty() && dis.is_empty()) || (!disadvantaged_anchors.is_empty() && adv.is_empty()) {
        return Err(Error::EmptyGroup("partner".into()));
    }

    let first: Vec<(usize, f64)> = advantaged_anchors.par_iter().map(|&a| nearest(pool, a, &dis)).collect();
    let second: Vec<(usize, f64)> = disadvantaged_anchors.par_iter().map(|&a| nearest(pool, a, &adv)).collect();

    let n = first.len() + second.len();
    let mut out = PairSelection {
        group1_rows: Vec::with_capacity(n),
        group2_rows: Vec::with_capacity(n),
        distances: Vec::with_capacity(n),
        pool_size: pool.n_rows(),
        seed,
    };
    for (&a, &(p, d)) in advantaged_anchors.iter().zip(&first) {
        out.group1_rows.push(a);
        out.group2_rows.push(p);
        out.distances.push(d);
    }
    for (&a, &(p, d)) in disadvantaged_anchors.iter().zip(&second) {
        out.group1_rows.push(p);
        out.group2_rows.push(a);
        out.distances.push(d);
    }
    Ok(out)
}

/// Draws `⌊n/2⌋` advantaged anchors and `n − ⌊n/2⌋` disadvantaged anchors
/// without replacement and pairs each with its nearest neighbour from the
/// other group. Distances use every column of `pool`.
pub fn select_pairs<T: Scalar>(pool: &Design<T>, n: usize, seed: u64) -> Result<PairSelection> {
    let (a1, a2) = sample_anchors(pool, n, seed)?;
    match_anchors(pool, &a1, &a2, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1, Array2};
    use Group::{Advantaged as A, Disadvantaged as D};

    fn design(x: Array2<f64>, groups: Vec<Group>) -> Design<f64> {
        let n = x.nrows();
        Design { x, y: Array1::zeros(n), groups, feature_names: vec![] }
    }

    #[test]
    fn toy_pool_by_hand() {
        // rows: A(0,0) A(5,5) D(1,0) D(4,5)
        let pool = design(array![[0.0, 0.0], [5.0, 5.0], [1.0, 0.0], [4.0, 5.0]], vec![A, A, D, D]);
        let sel = select_pairs(&pool, 2, 11).unwrap();
        assert_eq!(sel.len(), 2);
        let expected = |r: usize| match r {
            0 => 2,
            1 => 3,
            2 => 0,
            3 => 1,
            _ => unreachable!(),
        };
        assert_eq!(sel.group2_rows[0], expected(sel.group1_rows[0]));
        assert_eq!(sel.group1_rows[1], expected(sel.group2_rows[1]));
        assert_eq!(sel.distances, vec![1.0, 1.0]);
    }

    #[test]
    fn mirrored_groups_differ_only_in_sensitive_column() {
        let base = array![[0.1, 2.0], [1.3, -0.5], [-2.0, 0.7], [0.9, 0.9], [3.0, 1.0]];
        let mut x = Array2::zeros((10, 3));
        let mut groups = vec![];
        for (i, r) in base.rows().into_iter().enumerate() {
            for (g, s) in [(A, 1.0), (D, 0.0)] {
                let row = if g == A { i } else { i + 5 };
                x[[row, 0]] = r[0];
                x[[row, 1]] = r[1];
                x[[row, 2]] = s;
            }
        }
        groups.extend(vec![A; 5]);
        groups.extend(vec![D; 5]);
        let sel = select_pairs(&design(x, groups), 6, 0).unwrap();
        assert!(sel.distances.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let pool = design(array![[0.0], [1.0], [-1.0], [1.0]], vec![A, D, D, D]);
        let sel = select_pairs(&pool, 2, 0).unwrap();
        assert_eq!(sel.group1_rows[0], 0);
        assert_eq!(sel.group2_rows[0], 1);
    }

    #[test]
    fn nested_pools_never_increase_distance() {
        let x = Array2::from_shape_fn((60, 2), |(i, j)| ((i * 37 + j * 11) % 17) as f64 * 0.3 - (j as f64));
        let groups: Vec<Group> = (0..60).map(|i| if i % 3 == 0 { D } else { A }).collect();
        let full = design(x, groups);
        let small = full.rows(&(0..20).collect::<Vec<_>>());
        let (a1, a2) = sample_anchors(&small, 6, 4).unwrap();
        let mut last = f64::INFINITY;
        for size in [20, 40, 60] {
            let pool = full.rows(&(0..size).collect::<Vec<_>>());
            let d = match_anchors(&pool, &a1, &a2, 4).unwrap().mean_distance();
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn too_small_group() {
        let pool = design(array![[0.0], [1.0], [2.0]], vec![A, D, D]);
        assert!(select_pairs(&pool, 4, 0).is_err());
        assert!(select_pairs(&pool, 1, 0).is_err());
    }
}
