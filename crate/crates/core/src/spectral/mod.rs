//! Spectral fitting: layer groups, group subspaces, node communities.

mod algorithms;
mod fit;
mod kmeans;
mod partition;

pub use algorithms::{
    aggregate_groups, assign_group_dims, between_layer_cluster, bias_adjusted_square, cluster_rows,
    estimate_subspaces, estimate_subspaces_from_squares, estimate_subspaces_with, layer_embeddings,
    layer_squares, within_layer_cluster, BetweenLayerResult, SquareMode,
};
pub use fit::{fit_dimple, fit_stack, FitOptions, FitResult};
pub use kmeans::{approx_kmeans, kmeans_cost, kmeans_plus_plus, lloyd, KMeansOptions, KMeansResult};
pub use partition::{LayerPartition, NodePartition, SubspaceSet};

#[cfg(test)]
mod tests;
