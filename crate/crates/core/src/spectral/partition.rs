use crate::error::{Error, Result};
use crate::linalg::OrthonormalBasis;
use crate::scalar::Scalar;

/// Assignment of `L` layers to `M` groups; every group occurs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerPartition {
    labels: Vec<usize>,
    num_groups: usize,
}

impl LayerPartition {
    pub fn new(labels: Vec<usize>, num_groups: usize) -> Result<Self> {
        check_labels(&labels, num_groups, "layer group")?;
        Ok(Self { labels, num_groups })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_layers(&self) -> usize {
        self.labels.len()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// Group sizes `L_m`.
    pub fn sizes(&self) -> Vec<usize> {
        counts(&self.labels, self.num_groups)
    }

    /// Layers assigned to group `m`.
    pub fn members(&self, m: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(move |(_, &g)| g == m).map(|(l, _)| l)
    }

    /// Partition with every label `g` replaced by `perm[g]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        Self::new(self.labels.iter().map(|&g| perm[g]).collect(), self.num_groups)
    }
}

/// Community labels of `n` nodes for each of `M` groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePartition {
    labels: Vec<Vec<usize>>,
    counts: Vec<usize>,
}

impl NodePartition {
    /// `labels[m][i]` is the community of node `i` in group `m`, drawn from `0..counts[m]`.
    pub fn new(labels: Vec<Vec<usize>>, counts: Vec<usize>) -> Result<Self> {
        if labels.len() != counts.len() {
            return Err(Error::Dimension(format!(
                "{} label vectors for {} community counts",
                labels.len(),
                counts.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::Input("node partition has no groups".into()));
        }
        let n = labels[0].len();
        for (m, (z, &k)) in labels.iter().zip(&counts).enumerate() {
            if z.len() != n {
                return Err(Error::Dimension(format!("group {m} labels {} nodes, expected {n}", z.len())));
            }
            check_labels(z, k, "community")?;
        }
        Ok(Self { labels, counts })
    }

    pub fn num_groups(&self) -> usize {
        self.labels.len()
    }

    pub fn n(&self) -> usize {
        self.labels[0].len()
    }

    pub fn group(&self, m: usize) -> &[usize] {
        &self.labels[m]
    }

    pub fn community_counts(&self) -> &[usize] {
        &self.counts
    }

    /// Community sizes `n_{k,m}` of group `m`.
    pub fn sizes(&self, m: usize) -> Vec<usize> {
        counts(&self.labels[m], self.counts[m])
    }
}

/// Estimated group subspaces with the leading eigenvalues they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceSet<T> {
    pub bases: Vec<OrthonormalBasis<T>>,
    pub eigenvalues: Vec<Vec<T>>,
}

impl<T: Scalar> SubspaceSet<T> {
    /// A set from bases alone (eigenvalues left empty).
    pub fn from_bases(bases: Vec<OrthonormalBasis<T>>) -> Self {
        let eigenvalues = vec![Vec::new(); bases.len()];
        Self { bases, eigenvalues }
    }

    pub fn num_groups(&self) -> usize {
        self.bases.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.k()).collect()
    }
}

fn counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut c = vec![0usize; k];
    for &l in labels {
        c[l] += 1;
    }
    c
}

fn check_labels(labels: &[usize], k: usize, what: &str) -> Result<()> {
    if k == 0 {
        return Err(Error::Input(format!("{what} count must be positive")));
    }
    if let Some(&bad) = labels.iter().find(|&&g| g >= k) {
        return Err(Error::Input(format!("{what} label {bad} outside 0..{k}")));
    }
    let c = counts(labels, k);
    if let Some(empty) = c.iter().position(|&x| x == 0) {
        return Err(Error::Input(format!("{what} {empty} is empty")));
    }
    Ok(())
}
