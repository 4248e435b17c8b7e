//! Permutation-matched error rates.
//!
//! Every minimum over label permutations is solved exactly: sums through
//! linear assignment, the bottleneck criterion by enumeration.

mod assignment;

pub use assignment::{for_each_permutation, min_cost_assignment, min_cost_permutation};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::sin_theta;
use crate::netmodel::GroundTruth;
use crate::scalar::Scalar;
use crate::spectral::{FitResult, LayerPartition, NodePartition, SubspaceSet};

/// Largest group count accepted by the min-max subspace criterion.
pub const MAX_BOTTLENECK_GROUPS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatch {
    /// `permutation[estimated label] = true label`.
    pub permutation: Vec<usize>,
    pub disagreements: usize,
}

/// Confusion counts `c[e][t]` over `k x k` labels.
fn confusion(est: &[usize], truth: &[usize], k: usize) -> Array2<f64> {
    let mut c = Array2::zeros((k, k));
    for (&e, &t) in est.iter().zip(truth) {
        c[(e, t)] += 1.0;
    }
    c
}

/// Relabeling of `est` that agrees with `truth` on the most items.
///
/// Label sets may differ in size: the smaller side is padded with empty
/// labels, so unmatched labels count all their items as disagreements.
pub fn match_labels(est: &[usize], truth: &[usize]) -> Result<LabelMatch> {
    if est.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "label vectors of length {} and {}",
            est.len(),
            truth.len()
        )));
    }
    let k = est.iter().chain(truth).max().map_or(0, |&m| m + 1);
    match_with_k(est, truth, k)
}

fn match_with_k(est: &[usize], truth: &[usize], k: usize) -> Result<LabelMatch> {
    if k == 0 {
        return Ok(LabelMatch {
            permutation: Vec::new(),
            disagreements: 0,
        });
    }
    let conf = confusion(est, truth, k);
    let neg = conf.mapv(|x| -x);
    let permutation = min_cost_permutation(&neg);
    let agree: f64 = permutation.iter().enumerate().map(|(e, &t)| conf[(e, t)]).sum();
    Ok(LabelMatch {
        permutation,
        disagreements: est.len() - agree as usize,
    })
}

/// Fraction of misclassified layers, `R_BL`.
pub fn layer_error(est: &LayerPartition, truth: &LayerPartition) -> Result<f64> {
    if est.num_layers() != truth.num_layers() {
        return Err(Error::Dimension(format!(
            "partitions of {} and {} layers",
            est.num_layers(),
            truth.num_layers()
        )));
    }
    let k = est.num_groups().max(truth.num_groups());
    let m = match_with_k(est.labels(), truth.labels(), k)?;
    Ok(m.disagreements as f64 / est.num_layers() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithinLayerError {
    /// `R_WL`, mean of the matched per-group rates.
    pub r_wl: f64,
    /// `R_WL(m)` for every true group `m` under the optimal group matching.
    pub per_group: Vec<f64>,
    /// `group_perm[true group] = estimated group`.
    pub group_perm: Vec<usize>,
}

/// Community detection error minimized jointly over group and community relabelings.
pub fn within_layer_error(est: &NodePartition, truth: &NodePartition) -> Result<WithinLayerError> {
    let m = truth.num_groups();
    if est.num_groups() != m {
        return Err(Error::Dimension(format!(
            "{} estimated groups for {} true groups",
            est.num_groups(),
            m
        )));
    }
    if est.n() != truth.n() {
        return Err(Error::Dimension(format!("{} vs {} nodes", est.n(), truth.n())));
    }
    let n = truth.n();
    let mut cost = Array2::<f64>::zeros((m, m));
    for t in 0..m {
        for e in 0..m {
            let k = truth.community_counts()[t].max(est.community_counts()[e]);
            cost[(t, e)] = match_with_k(est.group(e), truth.group(t), k)?.disagreements as f64;
        }
    }
    let group_perm = min_cost_permutation(&cost);
    let per_group: Vec<f64> = group_perm
        .iter()
        .enumerate()
        .map(|(t, &e)| cost[(t, e)] / n as f64)
        .collect();
    let total: f64 = group_perm.iter().enumerate().map(|(t, &e)| cost[(t, e)]).sum();
    Ok(WithinLayerError {
        r_wl: total / (m * n) as f64,
        per_group,
        group_perm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceErrors {
    /// `min_π max_m ||sinΘ(V^(m), V̂^(π(m)))||_F`.
    pub r_s_max: f64,
    /// `M⁻¹ min_π Σ_m ||sinΘ(V^(m), V̂^(π(m)))||_F²`.
    pub r_s_ave: f64,
    /// Minimizer of the averaged criterion, `perm[true group] = estimated group`.
    pub ave_permutation: Vec<usize>,
    /// Minimizer of the bottleneck criterion.
    pub max_permutation: Vec<usize>,
}

/// Pairwise Frobenius `sinΘ` distances `d[true][est]`; pairs of unequal
/// dimension get the worst case `sqrt(min(K, K'))`.
pub fn subspace_distance_matrix<T: Scalar>(est: &SubspaceSet<T>, truth: &SubspaceSet<T>) -> Result<Array2<f64>> {
    let m = truth.num_groups();
    if est.num_groups() != m {
        return Err(Error::Dimension(format!(
            "{} estimated subspaces for {} true subspaces",
            est.num_groups(),
            m
        )));
    }
    let mut d = Array2::zeros((m, m));
    for t in 0..m {
        for e in 0..m {
            let (vt, ve) = (&truth.bases[t], &est.bases[e]);
            if vt.n() != ve.n() {
                return Err(Error::Dimension(format!("ambient dimensions {} and {}", vt.n(), ve.n())));
            }
            d[(t, e)] = if vt.k() == ve.k() {
                sin_theta(vt, ve)?.frobenius.as_f64()
            } else {
                (vt.k().min(ve.k()) as f64).sqrt()
            };
        }
    }
    Ok(d)
}

pub fn subspace_errors<T: Scalar>(est: &SubspaceSet<T>, truth: &SubspaceSet<T>) -> Result<SubspaceErrors> {
    let m = truth.num_groups();
    if m > MAX_BOTTLENECK_GROUPS {
        return Err(Error::Unsupported(format!(
            "min-max subspace error over {m} groups (limit {MAX_BOTTLENECK_GROUPS})"
        )));
    }
    let d = subspace_distance_matrix(est, truth)?;
    let sq = d.mapv(|x| x * x);
    let ave_permutation = min_cost_permutation(&sq);
    let total: f64 = ave_permutation.iter().enumerate().map(|(t, &e)| sq[(t, e)]).sum();

    let mut best = f64::INFINITY;
    let mut max_permutation: Vec<usize> = (0..m).collect();
    for_each_permutation(m, |p| {
        let worst = p.iter().enumerate().map(|(t, &e)| d[(t, e)]).fold(0.0, f64::max);
        if worst < best {
            best = worst;
            max_permutation = p.to_vec();
        }
    });
    Ok(SubspaceErrors {
        r_s_max: best.max(0.0),
        r_s_ave: (total / m as f64).max(0.0),
        ave_permutation,
        max_permutation,
    })
}

/// All error rates of a fit against the truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub r_bl: f64,
    /// Empty when no node partition was estimated or known.
    pub r_wl_per_group: Vec<f64>,
    pub r_wl: Option<f64>,
    pub r_s_max: f64,
    pub r_s_ave: f64,
    /// `perm[true group] = estimated group` from the community matching when
    /// available, otherwise from the averaged subspace matching.
    pub matched_group_permutation: Vec<usize>,
}

/// Scores a fit against known partitions and subspaces.
pub fn evaluate_parts<T: Scalar>(
    fit: &FitResult<T>,
    truth_layers: &LayerPartition,
    truth_nodes: Option<&NodePartition>,
    truth_subspaces: &SubspaceSet<T>,
) -> Result<ErrorReport> {
    let r_bl = layer_error(&fit.layer_partition, truth_layers)?;
    let sub = subspace_errors(&fit.subspaces, truth_subspaces)?;
    let within = match (&fit.node_partition, truth_nodes) {
        (Some(est), Some(t)) => Some(within_layer_error(est, t)?),
        _ => None,
    };
    let (r_wl, r_wl_per_group, matched) = match within {
        Some(w) => (Some(w.r_wl), w.per_group, w.group_perm),
        None => (None, Vec::new(), sub.ave_permutation.clone()),
    };
    Ok(ErrorReport {
        r_bl,
        r_wl_per_group,
        r_wl,
        r_s_max: sub.r_s_max,
        r_s_ave: sub.r_s_ave,
        matched_group_permutation: matched,
    })
}

pub fn evaluate<T: Scalar>(fit: &FitResult<T>, truth: &GroundTruth<T>) -> Result<ErrorReport> {
    let layers = truth.layer_partition()?;
    let nodes = truth.node_partition().transpose()?;
    evaluate_parts(fit, &layers, nodes.as_ref(), &truth.subspace_set())
}
