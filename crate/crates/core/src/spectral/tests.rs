use super::*;
use crate::linalg::{sin_theta, sym_eigs_topk, SymmetricMatrix};
use crate::metrics::{layer_error, match_labels, within_layer_error};
use crate::netmodel::{generate_dimple_truth, DimpleConfig, LayerStack};
use crate::Error;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(n: usize, l: usize, m: usize, k: usize, seed: u64) -> DimpleConfig {
    DimpleConfig {
        n,
        num_layers: l,
        num_groups: m,
        community_counts: vec![k; m],
        c_lo: 0.0,
        d_hi: 0.8,
        w: 1.0,
        alpha: Some(0.1),
        seed,
    }
}

fn random_binary(n: usize, p: f64, rng: &mut ChaCha8Rng) -> SymmetricMatrix<f64> {
    SymmetricMatrix::from_upper_fn(n, |i, j| if i != j && rng.random::<f64>() < p { 1.0 } else { 0.0 })
}

#[test]
fn two_cliques_embed_onto_indicators() {
    let n = 6;
    let a = SymmetricMatrix::from_upper_fn(n, |i, j| if i != j && (i < 3) == (j < 3) { 1.0 } else { 0.0 });
    let stack = LayerStack::new(vec![a], vec![2]).unwrap();
    let basis = &layer_embeddings(&stack).unwrap()[0];
    let s3 = 1.0 / 3f64.sqrt();
    let ind = Array2::from_shape_fn((n, 2), |(i, c)| if (i < 3) == (c == 0) { s3 } else { 0.0 });
    let truth = crate::linalg::OrthonormalBasis::new(ind).unwrap();
    assert!(sin_theta(basis, &truth).unwrap().frobenius < 1e-10);
}

#[test]
fn zero_layer_is_rank_deficient() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let stack = LayerStack::new(vec![random_binary(10, 0.5, &mut rng), SymmetricMatrix::zeros(10)], vec![2, 2]).unwrap();
    assert!(matches!(layer_embeddings(&stack), Err(Error::RankDeficientLayer { layer: 1, needed: 2 })));
}

#[test]
fn embedding_projector_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_binary(15, 0.4, &mut rng);
    let stack = LayerStack::new(vec![a.clone()], vec![3]).unwrap();
    let ours = layer_embeddings(&stack).unwrap()[0].projector();
    let eig = nalgebra::SymmetricEigen::new(nalgebra::DMatrix::from_fn(15, 15, |i, j| a.get(i, j)));
    let mut idx: Vec<usize> = (0..15).collect();
    idx.sort_by(|&x, &y| eig.eigenvalues[y].abs().partial_cmp(&eig.eigenvalues[x].abs()).unwrap());
    for i in 0..15 {
        for j in 0..15 {
            let p: f64 = idx[..3].iter().map(|&c| eig.eigenvectors[(i, c)] * eig.eigenvectors[(j, c)]).sum();
            assert!((p - ours[(i, j)]).abs() < 1e-9);
        }
    }
}

#[test]
fn noiseless_between_layer_recovery() {
    for seed in 0..10 {
        let truth = generate_dimple_truth::<f64>(&cfg(40, 12, 2, 3, seed)).unwrap();
        let res = between_layer_cluster(&truth.probability_stack(), 2, &KMeansOptions::default(), seed).unwrap();
        assert_eq!(layer_error(&res.partition, &truth.layer_partition().unwrap()).unwrap(), 0.0);
        assert_eq!(res.gram_spectrum.k(), 12);
    }
}

#[test]
fn single_group_and_bad_group_counts() {
    let truth = generate_dimple_truth::<f64>(&cfg(20, 4, 1, 2, 3)).unwrap();
    let stack = truth.probability_stack();
    let res = between_layer_cluster(&stack, 1, &KMeansOptions::default(), 0).unwrap();
    assert!(res.partition.labels().iter().all(|&g| g == 0));
    assert!(matches!(between_layer_cluster(&stack, 5, &KMeansOptions::default(), 0), Err(Error::Dimension(_))));
    assert!(between_layer_cluster(&stack, 0, &KMeansOptions::default(), 0).is_err());
}

#[test]
fn bias_adjusted_square_examples() {
    let z = SymmetricMatrix::<f64>::zeros(4);
    assert_eq!(bias_adjusted_square(&z).unwrap(), z);
    let k3 = SymmetricMatrix::from_upper_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
    assert_eq!(bias_adjusted_square(&k3).unwrap(), k3);
    let bad = SymmetricMatrix::from_diag(&[0.0, 1.0]);
    assert!(matches!(bias_adjusted_square(&bad), Err(Error::Input(_))));
}

#[test]
fn bias_adjusted_square_matches_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let a = random_binary(12, 0.3, &mut rng);
        let g = bias_adjusted_square(&a).unwrap();
        let sq = a.as_array().dot(a.as_array());
        for i in 0..12 {
            let deg: f64 = a.as_array().row(i).sum();
            for j in 0..12 {
                let expect = sq[(i, j)] - if i == j { deg } else { 0.0 };
                assert_eq!(g.get(i, j), expect);
            }
        }
    }
}

#[test]
fn aggregation_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = SymmetricMatrix::from_upper_fn(5, |_, _| rng.random_range(-1.0..1.0));
    let one = LayerPartition::new(vec![0, 0], 1).unwrap();
    let h = aggregate_groups(&[g.clone(), g.clone()], &one).unwrap();
    for (a, b) in h[0].as_array().iter().zip(g.as_array().iter()) {
        assert!((a - 2f64.sqrt() * b).abs() < 1e-14);
    }
    let g2 = SymmetricMatrix::from_upper_fn(5, |_, _| rng.random_range(-1.0..1.0));
    let own = LayerPartition::new(vec![1, 0], 2).unwrap();
    let h = aggregate_groups(&[g.clone(), g2.clone()], &own).unwrap();
    assert_eq!(h[0], g2);
    assert_eq!(h[1], g);
    let short = LayerPartition::new(vec![0], 1).unwrap();
    assert!(aggregate_groups(&[g.clone(), g2], &short).is_err());
}

#[test]
fn aggregation_matches_mode3_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (n, l, m) = (4, 7, 3);
    let layers: Vec<_> = (0..l)
        .map(|_| SymmetricMatrix::from_upper_fn(n, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    let part = LayerPartition::new(vec![0, 1, 2, 2, 0, 1, 2], m).unwrap();
    let sizes = part.sizes();
    // Ŵ = Ĉ D̂_c^{-1/2}; [G ×₃ Ŵᵀ](i,j,g) = Σ_l Ŵ(l,g) G(i,j,l)
    let w = Array2::from_shape_fn((l, m), |(ll, g)| {
        if part.labels()[ll] == g { 1.0 / (sizes[g] as f64).sqrt() } else { 0.0 }
    });
    let h = aggregate_groups(&layers, &part).unwrap();
    for g in 0..m {
        for i in 0..n {
            for j in 0..n {
                let direct: f64 = (0..l).map(|ll| w[(ll, g)] * layers[ll].get(i, j)).sum();
                assert!((direct - h[g].get(i, j)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn noiseless_subspace_recovery() {
    let truth = generate_dimple_truth::<f64>(&cfg(50, 10, 3, 3, 7)).unwrap();
    let squares: Vec<_> = truth.probabilities.layers.iter().map(|p| p.square()).collect();
    let set = estimate_subspaces_from_squares(&squares, &truth.layer_partition().unwrap(), &truth.group_dims).unwrap();
    for m in 0..3 {
        assert!(sin_theta(&set.bases[m], &truth.bases[m]).unwrap().frobenius < 1e-8);
    }
}

#[test]
fn single_layer_subspace_is_top_eigenspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_binary(14, 0.4, &mut rng);
    let stack = LayerStack::new(vec![a.clone()], vec![3]).unwrap();
    let part = LayerPartition::new(vec![0], 1).unwrap();
    let set = estimate_subspaces(&stack, &part, &[3]).unwrap();
    let direct = sym_eigs_topk(&bias_adjusted_square(&a).unwrap(), 3).unwrap();
    assert!(sin_theta(&set.bases[0], &direct.vectors).unwrap().frobenius < 1e-8);
}

#[test]
fn subspace_rank_deficiency_names_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let stack = LayerStack::new(vec![random_binary(10, 0.5, &mut rng), SymmetricMatrix::zeros(10)], vec![2, 2]).unwrap();
    let part = LayerPartition::new(vec![0, 1], 2).unwrap();
    assert!(matches!(
        estimate_subspaces(&stack, &part, &[2, 2]),
        Err(Error::RankDeficientGroup { group: 1, needed: 2 })
    ));
}

#[test]
fn within_layer_exact_recovery_and_single_community() {
    let truth = generate_dimple_truth::<f64>(&cfg(30, 4, 2, 3, 10)).unwrap();
    let set = truth.subspace_set();
    let nodes = within_layer_cluster(&set, &KMeansOptions::default(), 1).unwrap();
    let t = truth.node_partition().unwrap().unwrap();
    for m in 0..2 {
        assert_eq!(match_labels(nodes.group(m), t.group(m)).unwrap().disagreements, 0);
    }

    let single = generate_dimple_truth::<f64>(&cfg(30, 4, 1, 1, 10)).unwrap();
    let nodes = within_layer_cluster(&single.subspace_set(), &KMeansOptions::default(), 1).unwrap();
    assert!(nodes.group(0).iter().all(|&c| c == 0));
}

#[test]
fn group_dims_follow_group_size() {
    let part = LayerPartition::new(vec![0, 1, 1, 2, 2, 2], 3).unwrap();
    assert_eq!(assign_group_dims(&part, &[4]).unwrap(), vec![4, 4, 4]);
    assert_eq!(assign_group_dims(&part, &[5, 3, 2]).unwrap(), vec![2, 3, 5]);
    let tied = LayerPartition::new(vec![1, 0], 2).unwrap();
    assert_eq!(assign_group_dims(&tied, &[7, 2]).unwrap(), vec![7, 2]);
    assert!(assign_group_dims(&part, &[1, 2]).is_err());
}

#[test]
fn noiseless_fit_recovers_everything() {
    let truth = generate_dimple_truth::<f64>(&cfg(40, 10, 2, 3, 12)).unwrap();
    let opts = FitOptions { squares: SquareMode::Exact, ..Default::default() };
    let fit = fit_stack(&truth.probability_stack(), 2, &[3], &opts, 5).unwrap();
    assert_eq!(layer_error(&fit.layer_partition, &truth.layer_partition().unwrap()).unwrap(), 0.0);
    let w = within_layer_error(fit.node_partition.as_ref().unwrap(), &truth.node_partition().unwrap().unwrap()).unwrap();
    assert_eq!(w.r_wl, 0.0);
}

#[test]
fn trivial_fit_and_subspaces_only() {
    let truth = generate_dimple_truth::<f64>(&cfg(20, 3, 1, 1, 13)).unwrap();
    let net = crate::netmodel::sample_adjacency(&truth, 1);
    let fit = fit_dimple::<f64>(&net, 1, &[1], &FitOptions::default(), 0).unwrap();
    assert_eq!(fit.group_sizes, vec![3]);
    assert!(fit.node_partition.as_ref().unwrap().group(0).iter().all(|&c| c == 0));

    let g = crate::netmodel::generate_gdpg_truth::<f64>(&cfg(40, 6, 2, 2, 14)).unwrap();
    let net = crate::netmodel::sample_adjacency(&g, 2);
    let opts = FitOptions { subspaces_only: true, ..Default::default() };
    let fit = fit_dimple::<f64>(&net, 2, &[2], &opts, 0).unwrap();
    assert!(fit.node_partition.is_none());
    assert_eq!(fit.subspaces.num_groups(), 2);
}

#[test]
fn fit_errors_carry_stage() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let stack = LayerStack::new(vec![random_binary(10, 0.5, &mut rng), SymmetricMatrix::zeros(10)], vec![2, 2]).unwrap();
    let err = fit_stack(&stack, 1, &[2], &FitOptions::default(), 0).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: crate::Stage::BetweenLayer, .. }));
    assert!(err.is_numerical());
}

#[test]
fn fit_in_f32() {
    let truth = generate_dimple_truth::<f32>(&cfg(40, 8, 2, 3, 16)).unwrap();
    let opts = FitOptions { squares: SquareMode::Exact, ..Default::default() };
    let fit = fit_stack(&truth.probability_stack(), 2, &[3], &opts, 5).unwrap();
    assert_eq!(layer_error(&fit.layer_partition, &truth.layer_partition().unwrap()).unwrap(), 0.0);
}
