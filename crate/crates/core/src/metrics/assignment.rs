//! Exact linear assignment (Hungarian method with potentials, O(r² c)).

use ndarray::Array2;

use crate::scalar::Scalar;

/// Minimum-cost assignment of rows to distinct columns.
///
/// Returns `assign[row] = column`. For more rows than columns the problem is
/// solved on the transpose and rows left over map to `None`.
pub fn min_cost_assignment<T: Scalar>(cost: &Array2<T>) -> Vec<Option<usize>> {
    let (rows, cols) = cost.dim();
    if rows == 0 {
        return Vec::new();
    }
    if rows > cols {
        let t = cost.t().to_owned();
        let col_to_row = min_cost_assignment(&t);
        let mut out = vec![None; rows];
        for (c, r) in col_to_row.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        return out;
    }
    // 1-based potentials; column 0 is the virtual start.
    let inf = T::infinity();
    let mut u = vec![T::zero(); rows + 1];
    let mut v = vec![T::zero(); cols + 1];
    let mut p = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for j in 1..=cols {
        if p[j] != 0 {
            out[p[j] - 1] = Some(j - 1);
        }
    }
    out
}

/// Square-case convenience: `perm[row] = column`.
pub fn min_cost_permutation<T: Scalar>(cost: &Array2<T>) -> Vec<usize> {
    debug_assert_eq!(cost.nrows(), cost.ncols());
    min_cost_assignment(cost)
        .into_iter()
        .map(|c| c.expect("square assignment is complete"))
        .collect()
}

/// Calls `f` on every permutation of `0..k` in lexicographic order.
pub fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        f(&perm);
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return;
        };
        let j = (i..k).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(cost: &Array2<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for_each_permutation(cost.nrows(), |p| {
            let s: f64 = p.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum();
            best = best.min(s);
        });
        best
    }

    #[test]
    fn permutations_enumerated_once() {
        let mut seen = Vec::new();
        for_each_permutation(4, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 24);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, seen);
    }

    #[test]
    fn rectangular_assignment() {
        let cost = ndarray::array![[4.0, 1.0, 3.0], [1.0, 0.0, 5.0]];
        assert_eq!(min_cost_assignment(&cost), vec![Some(1), Some(0)]);
        let t = cost.t().to_owned();
        assert_eq!(min_cost_assignment(&t), vec![Some(1), Some(0), None]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn matches_exhaustive_enumeration(k in 1usize..5, vals in proptest::collection::vec(0.0f64..10.0, 16)) {
            let cost = Array2::from_shape_fn((k, k), |(r, c)| vals[r * 4 + c]);
            let perm = min_cost_permutation(&cost);
            let got: f64 = perm.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum();
            prop_assert!((got - brute(&cost)).abs() < 1e-12);
        }
    }
}
