//! Between-layer clustering, invariant subspace estimation and within-layer
//! community detection.

use ndarray::{s, Array2};
use rayon::prelude::*;

use super::kmeans::{approx_kmeans, KMeansOptions};
use super::partition::{LayerPartition, NodePartition, SubspaceSet};
use crate::error::{Error, Result};
use crate::linalg::{gram_from_bases, sym_eigs_topk, OrthonormalBasis, Spectrum, SymmetricMatrix};
use crate::netmodel::LayerStack;
use crate::rng::derive_seed;
use crate::scalar::Scalar;

/// True when the `k`-th largest magnitude is numerically zero relative to the first.
fn rank_deficient<T: Scalar>(spec: &Spectrum<T>, k: usize) -> bool {
    let lead = spec.values[0].abs();
    lead == T::zero() || !lead.is_finite() || spec.values[k - 1].abs() <= T::rank_tol() * lead
}

/// Leading `K^(l)` eigenvectors (by magnitude) of every layer.
pub fn layer_embeddings<T: Scalar>(stack: &LayerStack<T>) -> Result<Vec<OrthonormalBasis<T>>> {
    stack
        .layers()
        .par_iter()
        .zip(stack.ambient_dims().par_iter())
        .enumerate()
        .map(|(l, (a, &k))| {
            let spec = sym_eigs_topk(a, k)?;
            if rank_deficient(&spec, k) {
                return Err(Error::RankDeficientLayer { layer: l, needed: k });
            }
            Ok(spec.vectors)
        })
        .collect()
}

/// Output of [`between_layer_cluster`].
#[derive(Debug, Clone, PartialEq)]
pub struct BetweenLayerResult<T> {
    pub partition: LayerPartition,
    /// Full spectrum of the `L x L` Gram matrix of layer projectors.
    pub gram_spectrum: Spectrum<T>,
    /// `L x M` embedding whose rows were clustered.
    pub embedding: Array2<T>,
}

/// Groups layers by clustering the leading eigenvectors of the Gram matrix
/// `G(l, l') = ||Û_lᵀ Û_l'||_F²`, which are the leading right singular
/// vectors of the matrix of vectorized projectors `vec(Û_l Û_lᵀ)`.
pub fn between_layer_cluster<T: Scalar>(
    stack: &LayerStack<T>,
    num_groups: usize,
    kmeans: &KMeansOptions,
    seed: u64,
) -> Result<BetweenLayerResult<T>> {
    let l = stack.num_layers();
    if num_groups == 0 || num_groups > l {
        return Err(Error::Dimension(format!("cannot form {num_groups} groups from {l} layers")));
    }
    let bases = layer_embeddings(stack)?;
    let gram = gram_from_bases(&bases)?;
    if gram.as_array().iter().all(|&x| x == T::zero()) {
        return Err(Error::Numerical("Gram matrix of layer projectors is zero".into()));
    }
    let gram_spectrum = sym_eigs_topk(&gram, l)?;
    let embedding = gram_spectrum
        .vectors
        .columns()
        .slice(s![.., ..num_groups])
        .to_owned();
    let partition = cluster_rows(&embedding, num_groups, kmeans, seed)?;
    Ok(BetweenLayerResult {
        partition,
        gram_spectrum,
        embedding,
    })
}

/// k-means on the rows of an `L x M` embedding, returned as a layer partition.
pub fn cluster_rows<T: Scalar>(
    embedding: &Array2<T>,
    num_groups: usize,
    kmeans: &KMeansOptions,
    seed: u64,
) -> Result<LayerPartition> {
    let km = approx_kmeans(embedding.view(), num_groups, kmeans, seed)?;
    LayerPartition::new(km.labels, num_groups)
}

/// `A² - diag(A·1)`: its off-diagonal part is unbiased for `P²` when `A` is
/// a Bernoulli(P) adjacency matrix.
pub fn bias_adjusted_square<T: Scalar>(a: &SymmetricMatrix<T>) -> Result<SymmetricMatrix<T>> {
    let n = a.n();
    if let Some(i) = (0..n).find(|&i| a.get(i, i) != T::zero()) {
        return Err(Error::Input(format!("adjacency matrix has nonzero diagonal at {i}")));
    }
    let mut sq = a.square().into_array();
    for i in 0..n {
        let degree: T = a.as_array().row(i).sum();
        sq[(i, i)] -= degree;
    }
    Ok(SymmetricMatrix::from_array_unchecked(sq))
}

/// How per-layer squares are formed before aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SquareMode {
    /// `A² - diag(A·1)`, for observed adjacency layers.
    #[default]
    BiasAdjusted,
    /// Plain `P²`, for noiseless probability layers.
    Exact,
}

pub fn layer_squares<T: Scalar>(stack: &LayerStack<T>, mode: SquareMode) -> Result<Vec<SymmetricMatrix<T>>> {
    stack
        .layers()
        .par_iter()
        .map(|a| match mode {
            SquareMode::BiasAdjusted => bias_adjusted_square(a),
            SquareMode::Exact => Ok(a.square()),
        })
        .collect()
}

/// `Ĥ^(m) = L_m^{-1/2} Σ_{c(l)=m} Ĝ^(l)`, the mode-3 product with `Ŵ = Ĉ D̂_c^{-1/2}`.
pub fn aggregate_groups<T: Scalar>(
    g_layers: &[SymmetricMatrix<T>],
    part: &LayerPartition,
) -> Result<Vec<SymmetricMatrix<T>>> {
    if g_layers.len() != part.num_layers() {
        return Err(Error::Dimension(format!(
            "{} layers but a partition of {}",
            g_layers.len(),
            part.num_layers()
        )));
    }
    let n = g_layers.first().map_or(0, |g| g.n());
    let sizes = part.sizes();
    (0..part.num_groups())
        .map(|m| {
            if sizes[m] == 0 {
                return Err(Error::Input(format!("group {m} is empty")));
            }
            let mut acc = Array2::<T>::zeros((n, n));
            for l in part.members(m) {
                acc += g_layers[l].as_array();
            }
            let scale = T::one() / T::from_usize(sizes[m]).unwrap().sqrt();
            acc.mapv_inplace(|x| x * scale);
            Ok(SymmetricMatrix::from_array_unchecked(acc))
        })
        .collect()
}

/// Matches user-supplied community counts to groups: a single value is
/// broadcast, otherwise `ks[i]` goes to the `i`-th largest group (ties by
/// smaller label).
pub fn assign_group_dims(part: &LayerPartition, ks: &[usize]) -> Result<Vec<usize>> {
    let m = part.num_groups();
    match ks.len() {
        1 => Ok(vec![ks[0]; m]),
        len if len == m => {
            let sizes = part.sizes();
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
            let mut dims = vec![0; m];
            for (rank, &g) in order.iter().enumerate() {
                dims[g] = ks[rank];
            }
            Ok(dims)
        }
        len => Err(Error::Dimension(format!("{len} values of K for {m} groups"))),
    }
}

/// Leading `K_m` eigenvectors of each aggregated matrix, from prebuilt squares.
///
/// With exact `(P^(l))²` layers and the true partition this recovers the
/// true subspaces; it is the entry point for noiseless checks.
pub fn estimate_subspaces_from_squares<T: Scalar>(
    g_layers: &[SymmetricMatrix<T>],
    part: &LayerPartition,
    group_dims: &[usize],
) -> Result<SubspaceSet<T>> {
    if group_dims.len() != part.num_groups() {
        return Err(Error::Dimension(format!(
            "{} subspace dimensions for {} groups",
            group_dims.len(),
            part.num_groups()
        )));
    }
    let h = aggregate_groups(g_layers, part)?;
    let decomposed: Vec<Spectrum<T>> = h
        .par_iter()
        .zip(group_dims.par_iter())
        .enumerate()
        .map(|(m, (hm, &k))| {
            if k == 0 || k >= hm.n() {
                return Err(Error::Dimension(format!("group {m}: K_m={k} outside [1, n)")));
            }
            let spec = sym_eigs_topk(hm, k)?;
            if rank_deficient(&spec, k) {
                return Err(Error::RankDeficientGroup { group: m, needed: k });
            }
            Ok(spec)
        })
        .collect::<Result<_>>()?;
    let (bases, eigenvalues) = decomposed.into_iter().map(|s| (s.vectors, s.values)).unzip();
    Ok(SubspaceSet { bases, eigenvalues })
}

/// Invariant subspace of every group from bias-adjusted squares.
pub fn estimate_subspaces<T: Scalar>(
    stack: &LayerStack<T>,
    part: &LayerPartition,
    group_dims: &[usize],
) -> Result<SubspaceSet<T>> {
    estimate_subspaces_with(stack, part, group_dims, SquareMode::BiasAdjusted)
}

pub fn estimate_subspaces_with<T: Scalar>(
    stack: &LayerStack<T>,
    part: &LayerPartition,
    group_dims: &[usize],
    mode: SquareMode,
) -> Result<SubspaceSet<T>> {
    let g = layer_squares(stack, mode)?;
    estimate_subspaces_from_squares(&g, part, group_dims)
}

/// Clusters the rows of each estimated basis into `K_m` communities.
/// Group `m` uses k-means seed `derive_seed(seed, [m])`.
pub fn within_layer_cluster<T: Scalar>(
    subspaces: &SubspaceSet<T>,
    kmeans: &KMeansOptions,
    seed: u64,
) -> Result<NodePartition> {
    let results: Vec<Vec<usize>> = subspaces
        .bases
        .par_iter()
        .enumerate()
        .map(|(m, v)| {
            approx_kmeans(v.columns().view(), v.k(), kmeans, derive_seed(seed, &[m as u64]))
                .map(|r| r.labels)
        })
        .collect::<Result<_>>()?;
    NodePartition::new(results, subspaces.dims())
}
