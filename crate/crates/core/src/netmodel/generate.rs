//! Random stream layout (all under the config seed, see [`crate::rng`]):
//! stream 0 draws layer labels, stream 1 node labels or latent positions,
//! stream `2 + l` the block matrix of layer `l`. Adjacency sampling uses its
//! own seed with stream `l` for layer `l`.

use ndarray::Array2;
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use rand_distr::Gamma;
use rayon::prelude::*;

use super::{DimpleConfig, GroundTruth, ModelKind, MultiplexNetwork, ProbabilityTensor};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigs_topk, OrthonormalBasis, SymmetricMatrix};
use crate::rng::{substream, Rng as StreamRng};
use crate::scalar::Scalar;

const MAX_ATTEMPTS: usize = 1000;

/// I.i.d. uniform labels over `0..k`, redrawn until every label occurs.
fn balanced_labels(rng: &mut StreamRng, len: usize, k: usize, what: &str) -> Result<Vec<usize>> {
    for _ in 0..MAX_ATTEMPTS {
        let labels: Vec<usize> = (0..len).map(|_| rng.random_range(0..k)).collect();
        let mut seen = vec![false; k];
        for &c in &labels {
            seen[c] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(labels);
        }
    }
    Err(Error::Config(format!(
        "could not draw {k} non-empty {what} for {len} items in {MAX_ATTEMPTS} attempts"
    )))
}

/// `K x K` symmetric block matrix with Uniform(c, d) entries and off-diagonal scaled by `w`.
fn block_matrix<T: Scalar>(cfg: &DimpleConfig, k: usize, layer: usize) -> SymmetricMatrix<T> {
    let mut rng = substream(cfg.seed, 2 + layer as u64);
    let unif = Uniform::new(cfg.c_lo, cfg.d_hi).expect("validated range");
    SymmetricMatrix::from_upper_fn(k, |i, j| {
        let b = unif.sample(&mut rng);
        T::lit(if i == j { b } else { b * cfg.w })
    })
}

fn layer_labels(cfg: &DimpleConfig) -> Result<Vec<usize>> {
    let mut rng = substream(cfg.seed, 0);
    balanced_labels(&mut rng, cfg.num_layers, cfg.num_groups, "layer groups")
}

/// Synthetic DIMPLE instance: block-model layers whose communities are shared
/// within each group of layers.
pub fn generate_dimple_truth<T: Scalar>(cfg: &DimpleConfig) -> Result<GroundTruth<T>> {
    cfg.validate(false)?;
    let n = cfg.n;
    let labels = layer_labels(cfg)?;
    let mut node_rng = substream(cfg.seed, 1);
    let mut communities = Vec::with_capacity(cfg.num_groups);
    for &k in &cfg.community_counts {
        communities.push(balanced_labels(&mut node_rng, n, k, "communities")?);
    }

    let bases = communities
        .iter()
        .zip(&cfg.community_counts)
        .map(|(z, &k)| {
            let mut sizes = vec![0usize; k];
            for &c in z {
                sizes[c] += 1;
            }
            let mut v = Array2::zeros((n, k));
            for (i, &c) in z.iter().enumerate() {
                v[(i, c)] = T::one() / T::from_usize(sizes[c]).unwrap().sqrt();
            }
            OrthonormalBasis::from_columns_unchecked(v)
        })
        .collect();

    let blocks: Vec<SymmetricMatrix<T>> = labels
        .iter()
        .enumerate()
        .map(|(l, &m)| block_matrix(cfg, cfg.community_counts[m], l))
        .collect();
    let layers = labels
        .iter()
        .zip(&blocks)
        .map(|(&m, b)| {
            let z = &communities[m];
            SymmetricMatrix::from_upper_fn(n, |i, j| b.get(z[i], z[j]))
        })
        .collect();

    Ok(GroundTruth {
        model_kind: ModelKind::Dimple,
        layer_labels: labels,
        num_groups: cfg.num_groups,
        group_dims: cfg.community_counts.clone(),
        communities: Some(communities),
        latent_positions: None,
        connection_matrices: blocks,
        bases,
        probabilities: ProbabilityTensor { layers },
    })
}

fn dirichlet_rows<T: Scalar>(rng: &mut StreamRng, n: usize, k: usize, alpha: f64) -> Array2<T> {
    let gamma = Gamma::new(alpha, 1.0).expect("validated alpha");
    let mut x = Array2::zeros((n, k));
    for i in 0..n {
        loop {
            let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            if total > 0.0 && total.is_finite() {
                for (c, g) in draws.iter().enumerate() {
                    x[(i, c)] = T::lit(g / total);
                }
                break;
            }
        }
    }
    x
}

/// Left singular vectors of `x`: the top-`k` eigenvectors of `x xᵀ`.
fn column_space<T: Scalar>(x: &Array2<T>) -> Option<OrthonormalBasis<T>> {
    let n = x.nrows();
    let k = x.ncols();
    let xxt = x.dot(&x.t());
    let s = SymmetricMatrix::from_upper_fn(n, |i, j| xxt[(i, j)]);
    let spec = sym_eigs_topk(&s, k).ok()?;
    let lead = spec.values[0].abs();
    if lead == T::zero() || spec.values[k - 1].abs() <= T::rank_tol() * lead {
        return None;
    }
    Some(spec.vectors)
}

/// Synthetic DIMPLE-GDPG instance: latent positions drawn from a symmetric
/// Dirichlet, `P^(l) = X B^(l) Xᵀ`.
pub fn generate_gdpg_truth<T: Scalar>(cfg: &DimpleConfig) -> Result<GroundTruth<T>> {
    cfg.validate(true)?;
    let n = cfg.n;
    let alpha = cfg.alpha.expect("validated");
    let labels = layer_labels(cfg)?;
    let mut pos_rng = substream(cfg.seed, 1);
    let mut positions = Vec::with_capacity(cfg.num_groups);
    let mut bases = Vec::with_capacity(cfg.num_groups);
    for &k in &cfg.community_counts {
        let mut found = None;
        for _ in 0..MAX_ATTEMPTS {
            let x: Array2<T> = dirichlet_rows(&mut pos_rng, n, k, alpha);
            if let Some(v) = column_space(&x) {
                found = Some((x, v));
                break;
            }
        }
        let (x, v) = found.ok_or_else(|| {
            Error::Config(format!("latent positions of rank {k} not found in {MAX_ATTEMPTS} attempts"))
        })?;
        positions.push(x);
        bases.push(v);
    }

    let blocks: Vec<SymmetricMatrix<T>> = labels
        .iter()
        .enumerate()
        .map(|(l, &m)| block_matrix(cfg, cfg.community_counts[m], l))
        .collect();
    let layers = labels
        .iter()
        .zip(&blocks)
        .map(|(&m, b)| {
            let x = &positions[m];
            let xb = x.dot(b.as_array());
            let p = xb.dot(&x.t());
            SymmetricMatrix::from_upper_fn(n, |i, j| {
                // clamp away round-off outside [0, 1]
                p[(i, j)].max(T::zero()).min(T::one())
            })
        })
        .collect();

    Ok(GroundTruth {
        model_kind: ModelKind::Gdpg,
        layer_labels: labels,
        num_groups: cfg.num_groups,
        group_dims: cfg.community_counts.clone(),
        communities: None,
        latent_positions: Some(positions),
        connection_matrices: blocks,
        bases,
        probabilities: ProbabilityTensor { layers },
    })
}

pub fn generate_truth<T: Scalar>(kind: ModelKind, cfg: &DimpleConfig) -> Result<GroundTruth<T>> {
    match kind {
        ModelKind::Dimple => generate_dimple_truth(cfg),
        ModelKind::Gdpg => generate_gdpg_truth(cfg),
    }
}

/// Draws `A^(l)(i,j) ~ Bernoulli(P^(l)(i,j))` independently for `i < j`,
/// mirrored, with zero diagonal.
pub fn sample_adjacency<T: Scalar>(truth: &GroundTruth<T>, seed: u64) -> MultiplexNetwork {
    let n = truth.n();
    let layers: Vec<Array2<u8>> = truth
        .probabilities
        .layers
        .par_iter()
        .enumerate()
        .map(|(l, p)| {
            let mut rng = substream(seed, l as u64);
            let mut a = Array2::zeros((n, n));
            for i in 0..n {
                for j in (i + 1)..n {
                    let u: f64 = rng.random();
                    if u < p.get(i, j).as_f64() {
                        a[(i, j)] = 1;
                        a[(j, i)] = 1;
                    }
                }
            }
            a
        })
        .collect();
    MultiplexNetwork::from_parts_unchecked(n, layers, truth.ambient_dims())
}
