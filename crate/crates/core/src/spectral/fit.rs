use super::algorithms::{
    assign_group_dims, between_layer_cluster, estimate_subspaces_with, within_layer_cluster, SquareMode,
};
use super::kmeans::KMeansOptions;
use super::partition::{LayerPartition, NodePartition, SubspaceSet};
use crate::error::{Result, Stage};
use crate::linalg::Spectrum;
use crate::netmodel::{LayerStack, MultiplexNetwork};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    pub kmeans: KMeansOptions,
    /// Stop after subspace estimation (the GDPG use case).
    pub subspaces_only: bool,
    pub squares: SquareMode,
}

/// Everything produced by a full fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub layer_partition: LayerPartition,
    pub gram_spectrum: Spectrum<T>,
    pub subspaces: SubspaceSet<T>,
    /// `None` when only subspaces were requested.
    pub node_partition: Option<NodePartition>,
    pub group_sizes: Vec<usize>,
    /// `K_m` used for each estimated group.
    pub group_dims: Vec<usize>,
}

impl<T: Scalar> FitResult<T> {
    pub fn n(&self) -> usize {
        self.subspaces.bases[0].n()
    }

    pub fn num_groups(&self) -> usize {
        self.layer_partition.num_groups()
    }
}

/// Between-layer clustering, then subspace estimation, then (unless
/// disabled) within-layer clustering, on an arbitrary layer stack.
///
/// Stage seeds: `derive_seed(seed, [0])` for layers, `derive_seed(seed, [1])` for nodes.
pub fn fit_stack<T: Scalar>(
    stack: &LayerStack<T>,
    num_groups: usize,
    ks: &[usize],
    opts: &FitOptions,
    seed: u64,
) -> Result<FitResult<T>> {
    let between = between_layer_cluster(stack, num_groups, &opts.kmeans, derive_seed(seed, &[0]))
        .map_err(|e| e.at_stage(Stage::BetweenLayer))?;
    let part = between.partition;
    let group_dims = assign_group_dims(&part, ks).map_err(|e| e.at_stage(Stage::Subspaces))?;
    let subspaces =
        estimate_subspaces_with(stack, &part, &group_dims, opts.squares).map_err(|e| e.at_stage(Stage::Subspaces))?;
    let node_partition = if opts.subspaces_only {
        None
    } else {
        Some(
            within_layer_cluster(&subspaces, &opts.kmeans, derive_seed(seed, &[1]))
                .map_err(|e| e.at_stage(Stage::WithinLayer))?,
        )
    };
    Ok(FitResult {
        group_sizes: part.sizes(),
        layer_partition: part,
        gram_spectrum: between.gram_spectrum,
        subspaces,
        node_partition,
        group_dims,
    })
}

/// [`fit_stack`] on a binary multiplex network.
pub fn fit_dimple<T: Scalar>(
    net: &MultiplexNetwork,
    num_groups: usize,
    ks: &[usize],
    opts: &FitOptions,
    seed: u64,
) -> Result<FitResult<T>> {
    fit_stack(&net.to_stack::<T>(), num_groups, ks, opts, seed)
}
