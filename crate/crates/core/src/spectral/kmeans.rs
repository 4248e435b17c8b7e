//! k-means++ seeding with Lloyd refinement and restarts.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, Rng as StreamRng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub restarts: usize,
    pub max_iters: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult<T> {
    pub labels: Vec<usize>,
    /// `k x d` cluster means.
    pub centers: Array2<T>,
    /// Sum of squared distances of points to their assigned centers.
    pub cost: T,
}

#[inline]
fn dist2<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// Clustering cost of `labels` against `centers`.
pub fn kmeans_cost<T: Scalar>(points: ArrayView2<'_, T>, labels: &[usize], centers: ArrayView2<'_, T>) -> T {
    points
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(p, &c)| dist2(p, centers.row(c)))
        .sum()
}

fn check_input<T: Scalar>(points: ArrayView2<'_, T>, k: usize) -> Result<()> {
    let (n, d) = points.dim();
    if d == 0 {
        return Err(Error::Input("points have zero dimensions".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("cannot form {k} clusters from {n} points")));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("points have non-finite coordinates".into()));
    }
    Ok(())
}

/// Best of `opts.restarts` runs of k-means++ seeding followed by Lloyd iterations.
///
/// Restart `r` draws from stream `r` of `seed`; ties in cost keep the earliest restart.
pub fn approx_kmeans<T: Scalar>(
    points: ArrayView2<'_, T>,
    k: usize,
    opts: &KMeansOptions,
    seed: u64,
) -> Result<KMeansResult<T>> {
    check_input(points, k)?;
    let mut best: Option<KMeansResult<T>> = None;
    for r in 0..opts.restarts.max(1) {
        let mut rng = substream(seed, r as u64);
        let init = kmeans_plus_plus(points, k, &mut rng);
        let (res, _) = lloyd(points, init, opts.max_iters);
        if best.as_ref().is_none_or(|b| res.cost < b.cost) {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// D²-weighted seeding.
pub fn kmeans_plus_plus<T: Scalar>(points: ArrayView2<'_, T>, k: usize, rng: &mut StreamRng) -> Array2<T> {
    let (n, d) = points.dim();
    let mut centers = Array2::zeros((k, d));
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&points.row(first));
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| dist2(p, points.row(first)).as_f64())
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                acc += w;
                if acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // round-off can leave target just above the final partial sum
            chosen.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        centers.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            let nd = dist2(p, points.row(pick)).as_f64();
            if nd < d2[i] {
                d2[i] = nd;
            }
        }
    }
    centers
}

fn assign<T: Scalar>(points: ArrayView2<'_, T>, centers: &Array2<T>, labels: &mut [usize]) {
    for (p, lab) in points.rows().into_iter().zip(labels.iter_mut()) {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (c, center) in centers.rows().into_iter().enumerate() {
            let dd = dist2(p, center);
            if dd < best_d {
                best_d = dd;
                best = c;
            }
        }
        *lab = best;
    }
}

/// Recomputes `centers` as cluster means. An empty cluster takes over the
/// point farthest from its own center among clusters with more than one point.
fn update_centers<T: Scalar>(points: ArrayView2<'_, T>, labels: &mut [usize], centers: &mut Array2<T>) {
    let k = centers.nrows();
    loop {
        let mut counts = vec![0usize; k];
        let mut sums = Array2::<T>::zeros(centers.raw_dim());
        for (p, &c) in points.rows().into_iter().zip(labels.iter()) {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += &p;
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let inv = T::one() / T::from_usize(count).unwrap();
                centers.row_mut(c).assign(&sums.row(c).mapv(|x| x * inv));
            }
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = T::neg_infinity();
        for (i, p) in points.rows().into_iter().enumerate() {
            if counts[labels[i]] > 1 {
                let dd = dist2(p, centers.row(labels[i]));
                if dd > far_d {
                    far_d = dd;
                    far = Some(i);
                }
            }
        }
        let i = far.expect("k <= number of points leaves a donor cluster");
        labels[i] = empty;
        centers.row_mut(empty).assign(&points.row(i));
    }
}

/// Lloyd iterations from `centers` until the assignment is a fixpoint or
/// `max_iters` updates have run. Returns the result and the cost after every
/// center update (non-increasing).
pub fn lloyd<T: Scalar>(
    points: ArrayView2<'_, T>,
    mut centers: Array2<T>,
    max_iters: usize,
) -> (KMeansResult<T>, Vec<T>) {
    let n = points.nrows();
    let mut labels = vec![0usize; n];
    assign(points, &centers, &mut labels);
    let mut trace = Vec::new();
    let mut next = labels.clone();
    for _ in 0..max_iters.max(1) {
        update_centers(points, &mut labels, &mut centers);
        trace.push(kmeans_cost(points, &labels, centers.view()));
        assign(points, &centers, &mut next);
        if next == labels {
            break;
        }
        labels.copy_from_slice(&next);
    }
    update_centers(points, &mut labels, &mut centers);
    let cost = kmeans_cost(points, &labels, centers.view());
    trace.push(cost);
    (
        KMeansResult {
            labels,
            centers,
            cost,
        },
        trace,
    )
}
