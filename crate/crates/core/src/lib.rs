//! Spectral fitting of DIMPLE and DIMPLE-GDPG multiplex networks.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the file formats and the simulation
//! harness use.

pub mod error;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod netmodel;
pub mod rng;
pub mod scalar;
pub mod simharness;
pub mod spectral;

pub use error::{Error, Result, Stage};
pub use scalar::Scalar;

pub type SymMatrix = linalg::SymmetricMatrix<f64>;
pub type Basis = linalg::OrthonormalBasis<f64>;
pub type Stack = netmodel::LayerStack<f64>;
pub type Truth = netmodel::GroundTruth<f64>;
pub type Subspaces = spectral::SubspaceSet<f64>;
pub type Fit = spectral::FitResult<f64>;
