//! Multiplex network types, synthetic DIMPLE / DIMPLE-GDPG generators and
//! Bernoulli sampling of adjacency tensors.

mod generate;
mod network;

pub use generate::{generate_dimple_truth, generate_gdpg_truth, generate_truth, sample_adjacency};
pub use network::{validate_network, LayerStack, MultiplexNetwork, NetworkDiagnostics, Violation};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{OrthonormalBasis, SymmetricMatrix};
use crate::scalar::Scalar;
use crate::spectral::{LayerPartition, NodePartition, SubspaceSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Block-model layers sharing community structure within a group.
    Dimple,
    /// Generalized dot product graph layers sharing an invariant subspace.
    Gdpg,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dimple => "dimple",
            ModelKind::Gdpg => "gdpg",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dimple" => Ok(ModelKind::Dimple),
            "gdpg" => Ok(ModelKind::Gdpg),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimpleConfig {
    /// Number of nodes.
    pub n: usize,
    /// Number of layers.
    #[serde(rename = "L")]
    pub num_layers: usize,
    /// Number of layer groups.
    #[serde(rename = "M")]
    pub num_groups: usize,
    /// Community count (or subspace dimension) of each group.
    #[serde(rename = "K")]
    pub community_counts: Vec<usize>,
    /// Lower end of the block-probability range.
    #[serde(rename = "c", default)]
    pub c_lo: f64,
    /// Upper end of the block-probability range.
    #[serde(rename = "d")]
    pub d_hi: f64,
    /// Multiplier of off-diagonal block probabilities.
    pub w: f64,
    /// Dirichlet parameter for latent positions (GDPG only).
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl DimpleConfig {
    /// Checks the generator invariants. `needs_alpha` is set for GDPG.
    pub fn validate(&self, needs_alpha: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.num_layers == 0 || self.num_groups == 0 {
            return bad("L and M must be positive".into());
        }
        if self.num_groups > self.num_layers {
            return bad(format!("M={} exceeds L={}", self.num_groups, self.num_layers));
        }
        if self.community_counts.len() != self.num_groups {
            return bad(format!(
                "K lists {} values for M={} groups",
                self.community_counts.len(),
                self.num_groups
            ));
        }
        if let Some(&k) = self.community_counts.iter().find(|&&k| k == 0 || k >= self.n) {
            return bad(format!("every K_m must satisfy 1 <= K_m < n, got {k}"));
        }
        if !(self.c_lo.is_finite() && self.d_hi.is_finite() && 0.0 <= self.c_lo && self.c_lo < self.d_hi && self.d_hi <= 1.0) {
            return bad(format!("need 0 <= c < d <= 1, got c={}, d={}", self.c_lo, self.d_hi));
        }
        if !(self.w.is_finite() && self.w >= 0.0 && self.w * self.d_hi <= 1.0) {
            return bad(format!("need w >= 0 and w*d <= 1, got w={}", self.w));
        }
        if needs_alpha {
            match self.alpha {
                Some(a) if a.is_finite() && a > 0.0 => {}
                Some(a) => return bad(format!("alpha must be positive, got {a}")),
                None => return bad("the gdpg model requires alpha".into()),
            }
        }
        Ok(())
    }

    /// Broadcast a single value of K to every group.
    pub fn with_uniform_k(mut self, k: usize) -> Self {
        self.community_counts = vec![k; self.num_groups];
        self
    }
}

/// Edge-probability layers `P^(l)` with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor<T> {
    pub layers: Vec<SymmetricMatrix<T>>,
}

impl<T: Scalar> ProbabilityTensor<T> {
    pub fn n(&self) -> usize {
        self.layers.first().map_or(0, |l| l.n())
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }
}

/// The objects a synthetic instance was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth<T> {
    pub model_kind: ModelKind,
    /// Group of each layer, `0..M`.
    pub layer_labels: Vec<usize>,
    /// Number of groups.
    pub num_groups: usize,
    /// Subspace dimension of each group.
    pub group_dims: Vec<usize>,
    /// Community of each node, per group (DIMPLE only).
    pub communities: Option<Vec<Vec<usize>>>,
    /// Latent positions `X^(m)` with rows on the simplex (GDPG only).
    pub latent_positions: Option<Vec<Array2<T>>>,
    /// Block matrices `B^(l)`, one per layer.
    pub connection_matrices: Vec<SymmetricMatrix<T>>,
    /// Orthonormal bases `V^(m)` of the group subspaces.
    pub bases: Vec<OrthonormalBasis<T>>,
    pub probabilities: ProbabilityTensor<T>,
}

impl<T: Scalar> GroundTruth<T> {
    pub fn n(&self) -> usize {
        self.probabilities.n()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_labels.len()
    }

    /// Ambient dimension `K^(l) = K_{c(l)}` of every layer.
    pub fn ambient_dims(&self) -> Vec<usize> {
        self.layer_labels.iter().map(|&m| self.group_dims[m]).collect()
    }

    /// The probability layers as an input stack for the fitting routines.
    pub fn probability_stack(&self) -> LayerStack<T> {
        LayerStack::new(self.probabilities.layers.clone(), self.ambient_dims())
            .expect("ground truth probability layers are consistent")
    }

    pub fn layer_partition(&self) -> Result<LayerPartition> {
        LayerPartition::new(self.layer_labels.clone(), self.num_groups)
    }

    /// True communities, for DIMPLE truths.
    pub fn node_partition(&self) -> Option<Result<NodePartition>> {
        let z = self.communities.as_ref()?;
        Some(NodePartition::new(z.clone(), self.group_dims.clone()))
    }

    pub fn subspace_set(&self) -> SubspaceSet<T> {
        SubspaceSet::from_bases(self.bases.clone())
    }

    /// Community-indicator matrix `Z^(m)` (n x K_m) for a DIMPLE truth.
    pub fn membership_matrix(&self, group: usize) -> Option<Array2<T>> {
        let z = &self.communities.as_ref()?[group];
        let k = self.group_dims[group];
        let mut m = Array2::zeros((z.len(), k));
        for (i, &c) in z.iter().enumerate() {
            m[(i, c)] = T::one();
        }
        Some(m)
    }
}
