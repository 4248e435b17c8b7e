use ndarray::Array2;

use crate::error::{Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::scalar::Scalar;

/// `L` binary symmetric adjacency layers on a shared set of `n` nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplexNetwork {
    n: usize,
    layers: Vec<Array2<u8>>,
    ambient_dims: Vec<usize>,
}

impl MultiplexNetwork {
    /// Builds a network, rejecting it if [`validate_network`] reports any violation.
    pub fn new(n: usize, layers: Vec<Array2<u8>>, ambient_dims: Vec<usize>) -> Result<Self> {
        let net = Self::from_parts_unchecked(n, layers, ambient_dims);
        let diag = validate_network(&net);
        match diag.errors.first() {
            None => Ok(net),
            Some(v) => Err(Error::Input(format!(
                "{} invalid entries, first: {v}",
                diag.errors.len()
            ))),
        }
    }

    /// Assembles a network without checking it; use [`validate_network`] to inspect it.
    pub fn from_parts_unchecked(n: usize, layers: Vec<Array2<u8>>, ambient_dims: Vec<usize>) -> Self {
        Self {
            n,
            layers,
            ambient_dims,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, l: usize) -> &Array2<u8> {
        &self.layers[l]
    }

    pub fn layers(&self) -> &[Array2<u8>] {
        &self.layers
    }

    pub fn ambient_dims(&self) -> &[usize] {
        &self.ambient_dims
    }

    pub fn with_ambient_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != self.layers.len() {
            return Err(Error::Dimension(format!(
                "{} ambient dimensions for {} layers",
                dims.len(),
                self.layers.len()
            )));
        }
        self.ambient_dims = dims;
        Ok(self)
    }

    /// Number of undirected edges in layer `l`.
    pub fn edge_count(&self, l: usize) -> usize {
        let a = &self.layers[l];
        let mut count = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if a[(i, j)] != 0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Fraction of node pairs connected in layer `l`.
    pub fn density(&self, l: usize) -> f64 {
        let pairs = self.n * (self.n - 1) / 2;
        if pairs == 0 {
            0.0
        } else {
            self.edge_count(l) as f64 / pairs as f64
        }
    }

    /// Layer `l` as a real symmetric matrix.
    pub fn layer_matrix<T: Scalar>(&self, l: usize) -> SymmetricMatrix<T> {
        let a = &self.layers[l];
        SymmetricMatrix::from_upper_fn(self.n, |i, j| if a[(i, j)] != 0 { T::one() } else { T::zero() })
    }

    pub fn to_stack<T: Scalar>(&self) -> LayerStack<T> {
        LayerStack {
            layers: (0..self.num_layers()).map(|l| self.layer_matrix(l)).collect(),
            ambient_dims: self.ambient_dims.clone(),
        }
    }

    /// Relabels nodes so that new node `i` is old node `perm[i]`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|a| Array2::from_shape_fn((self.n, self.n), |(i, j)| a[(perm[i], perm[j])]))
            .collect();
        Self::from_parts_unchecked(self.n, layers, self.ambient_dims.clone())
    }
}

/// Real-valued symmetric layers with their ambient dimensions `K^(l)`: the
/// input of the fitting routines. Built from a [`MultiplexNetwork`] or, for
/// noiseless checks, directly from probability layers.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack<T> {
    layers: Vec<SymmetricMatrix<T>>,
    ambient_dims: Vec<usize>,
}

impl<T: Scalar> LayerStack<T> {
    pub fn new(layers: Vec<SymmetricMatrix<T>>, ambient_dims: Vec<usize>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input("no layers".into()));
        }
        if layers.len() != ambient_dims.len() {
            return Err(Error::Dimension(format!(
                "{} ambient dimensions for {} layers",
                ambient_dims.len(),
                layers.len()
            )));
        }
        let n = layers[0].n();
        if let Some(l) = layers.iter().position(|m| m.n() != n) {
            return Err(Error::Dimension(format!("layer {l} is not {n}x{n}")));
        }
        if let Some(l) = ambient_dims.iter().position(|&k| k == 0 || k >= n) {
            return Err(Error::Dimension(format!(
                "layer {l} has ambient dimension {} outside [1, n)",
                ambient_dims[l]
            )));
        }
        Ok(Self { layers, ambient_dims })
    }

    pub fn n(&self) -> usize {
        self.layers[0].n()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SymmetricMatrix<T>] {
        &self.layers
    }

    pub fn ambient_dims(&self) -> &[usize] {
        &self.ambient_dims
    }
}

/// A single broken network invariant. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Shape { layer: usize, rows: usize, cols: usize },
    Asymmetric { layer: usize, i: usize, j: usize },
    Diagonal { layer: usize, i: usize },
    NonBinary { layer: usize, i: usize, j: usize, value: u8 },
    AmbientDim { layer: usize, dim: usize },
    LayerCount { layers: usize, dims: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Violation::Shape { layer, rows, cols } => write!(f, "layer {layer}: shape {rows}x{cols}"),
            Violation::Asymmetric { layer, i, j } => write!(f, "layer {layer}: A({i},{j}) != A({j},{i})"),
            Violation::Diagonal { layer, i } => write!(f, "layer {layer}: nonzero diagonal at {i}"),
            Violation::NonBinary { layer, i, j, value } => {
                write!(f, "layer {layer}: A({i},{j}) = {value} is not binary")
            }
            Violation::AmbientDim { layer, dim } => {
                write!(f, "layer {layer}: ambient dimension {dim} outside [1, n)")
            }
            Violation::LayerCount { layers, dims } => {
                write!(f, "{layers} layers but {dims} ambient dimensions")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDiagnostics {
    pub errors: Vec<Violation>,
    /// Edge density of each layer (NaN for malformed layers).
    pub densities: Vec<f64>,
}

impl NetworkDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate_network(net: &MultiplexNetwork) -> NetworkDiagnostics {
    let n = net.n;
    let mut errors = Vec::new();
    let mut densities = Vec::with_capacity(net.layers.len());
    if net.layers.len() != net.ambient_dims.len() {
        errors.push(Violation::LayerCount {
            layers: net.layers.len(),
            dims: net.ambient_dims.len(),
        });
    }
    for (l, &dim) in net.ambient_dims.iter().enumerate() {
        if dim == 0 || dim >= n {
            errors.push(Violation::AmbientDim { layer: l, dim });
        }
    }
    for (l, a) in net.layers.iter().enumerate() {
        let (rows, cols) = a.dim();
        if rows != n || cols != n {
            errors.push(Violation::Shape { layer: l, rows, cols });
            densities.push(f64::NAN);
            continue;
        }
        for i in 0..n {
            if a[(i, i)] != 0 {
                errors.push(Violation::Diagonal { layer: l, i });
            }
            for j in 0..n {
                let v = a[(i, j)];
                if v > 1 {
                    errors.push(Violation::NonBinary { layer: l, i, j, value: v });
                }
                if j > i && v != a[(j, i)] {
                    errors.push(Violation::Asymmetric { layer: l, i, j });
                }
            }
        }
        densities.push(net.density(l));
    }
    NetworkDiagnostics { errors, densities }
}
