//! Dense symmetric spectral primitives.

mod eigen;

pub use eigen::{symmetric_eigen, DenseEigen};

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square matrix with exact symmetry `a[(i, j)] == a[(j, i)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<T> {
    data: Array2<T>,
}

impl<T: Scalar> SymmetricMatrix<T> {
    /// Wraps `data`, rejecting non-square or non-symmetric input.
    pub fn new(data: Array2<T>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::Dimension(format!("{r}x{c} matrix is not square")));
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let (a, b) = (data[(i, j)], data[(j, i)]);
                // NaN never equals itself; finiteness is checked by the solvers.
                if a != b && !(a.is_nan() && b.is_nan()) {
                    return Err(Error::Input(format!("entry ({i},{j}) differs from ({j},{i})")));
                }
            }
        }
        Ok(Self { data })
    }

    /// Builds a matrix from its upper triangle (diagonal included), mirroring it.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            data: Array2::zeros((n, n)),
        }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        Self {
            data: Array2::from_diag(&ndarray::Array1::from(diag.to_vec())),
        }
    }

    /// Symmetrizes `a` exactly by averaging it with its transpose.
    pub fn symmetrize(a: &Array2<T>) -> Result<Self> {
        let (r, c) = a.dim();
        if r != c {
            return Err(Error::Dimension(format!("{r}x{c} matrix is not square")));
        }
        Ok(Self::from_upper_fn(r, |i, j| {
            if i == j {
                a[(i, i)]
            } else {
                (a[(i, j)] + a[(j, i)]) * T::lit(0.5)
            }
        }))
    }

    pub(crate) fn from_array_unchecked(data: Array2<T>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        Self { data }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.data.view()
    }

    pub fn as_array(&self) -> &Array2<T> {
        &self.data
    }

    pub fn into_array(self) -> Array2<T> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[(i, j)]
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn trace(&self) -> T {
        self.data.diag().iter().copied().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `self * self`, symmetric by construction.
    pub fn square(&self) -> Self {
        let sq = self.data.dot(&self.data);
        Self::from_upper_fn(self.n(), |i, j| sq[(i, j)])
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigen(&self) -> Result<DenseEigen<T>> {
        if !self.is_finite() {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        let n = self.n();
        let flat: Vec<T> = self.data.iter().copied().collect();
        symmetric_eigen(n, &flat)
    }
}

/// `n x k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis<T> {
    columns: Array2<T>,
}

impl<T: Scalar> OrthonormalBasis<T> {
    /// Accepts `columns` if `columnsᵀ columns` is the identity to within
    /// [`Scalar::orthonormal_tol`] in Frobenius norm.
    pub fn new(columns: Array2<T>) -> Result<Self> {
        let (n, k) = columns.dim();
        if k == 0 || k > n {
            return Err(Error::Dimension(format!(
                "basis must satisfy 1 <= k <= n, got n={n}, k={k}"
            )));
        }
        if columns.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("basis has non-finite entries".into()));
        }
        let err = orthonormality_error(columns.view());
        if err > T::orthonormal_tol(n) {
            return Err(Error::Input(format!(
                "columns are not orthonormal (||UᵀU - I||_F = {err})"
            )));
        }
        Ok(Self { columns })
    }

    pub(crate) fn from_columns_unchecked(columns: Array2<T>) -> Self {
        Self { columns }
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.columns.nrows()
    }

    /// Subspace dimension.
    pub fn k(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &Array2<T> {
        &self.columns
    }

    pub fn into_columns(self) -> Array2<T> {
        self.columns
    }

    /// Orthogonal projector `U Uᵀ` onto the spanned subspace.
    pub fn projector(&self) -> Array2<T> {
        self.columns.dot(&self.columns.t())
    }

    /// Basis with rows reordered so that new row `i` is old row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Self {
            columns: self.columns.select(Axis(0), perm),
        }
    }
}

/// `||UᵀU - I||_F`.
pub fn orthonormality_error<T: Scalar>(u: ArrayView2<'_, T>) -> T {
    let g = u.t().dot(&u);
    let mut acc = T::zero();
    for ((i, j), &v) in g.indexed_iter() {
        let d = if i == j { v - T::one() } else { v };
        acc += d * d;
    }
    acc.sqrt()
}

/// Leading eigenpairs ordered by non-increasing `|value|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    pub values: Vec<T>,
    pub vectors: OrthonormalBasis<T>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalue magnitudes, the singular values of the symmetric input.
    pub fn magnitudes(&self) -> Vec<T> {
        self.values.iter().map(|v| v.abs()).collect()
    }
}

/// Indices of `values` ordered by descending magnitude; equal magnitudes put
/// the larger signed value first, then the lower index.
fn magnitude_order<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let (va, vb) = (values[a], values[b]);
        vb.abs()
            .partial_cmp(&va.abs())
            .unwrap_or(Ordering::Equal)
            .then(vb.partial_cmp(&va).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });
    idx
}

/// The `k` eigenpairs of `s` with largest `|eigenvalue|`.
pub fn sym_eigs_topk<T: Scalar>(s: &SymmetricMatrix<T>, k: usize) -> Result<Spectrum<T>> {
    let n = s.n();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!("requested k={k} eigenpairs of a {n}x{n} matrix")));
    }
    let full = s.eigen()?;
    Ok(select_top(&full, k))
}

fn select_top<T: Scalar>(full: &DenseEigen<T>, k: usize) -> Spectrum<T> {
    let n = full.n;
    let order = magnitude_order(&full.values);
    let mut values = Vec::with_capacity(k);
    let mut columns = Array2::zeros((n, k));
    for (c, &j) in order.iter().take(k).enumerate() {
        values.push(full.values[j]);
        for (r, &x) in full.vector(j).iter().enumerate() {
            columns[(r, c)] = x;
        }
    }
    Spectrum {
        values,
        vectors: OrthonormalBasis::from_columns_unchecked(columns),
    }
}

/// Nearest rank-`k` matrix: `Σ_{j≤k} λ_j v_j v_jᵀ` over the largest-magnitude pairs.
pub fn rank_k_projection<T: Scalar>(s: &SymmetricMatrix<T>, k: usize) -> Result<SymmetricMatrix<T>> {
    let spec = sym_eigs_topk(s, k)?;
    let v = spec.vectors.columns();
    let mut scaled = v.clone();
    for (mut col, &lam) in scaled.axis_iter_mut(Axis(1)).zip(&spec.values) {
        col.mapv_inplace(|x| x * lam);
    }
    let full = scaled.dot(&v.t());
    Ok(SymmetricMatrix::from_upper_fn(s.n(), |i, j| {
        if i == j {
            full[(i, i)]
        } else {
            (full[(i, j)] + full[(j, i)]) * T::lit(0.5)
        }
    }))
}

/// Spectral and Frobenius `sinΘ` distances between two `K`-dimensional subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinTheta<T> {
    pub spectral: T,
    pub frobenius: T,
}

/// `sinΘ` distances between the column spaces of `u` and `v`.
///
/// Evaluated through the residual `R = V - U(UᵀV)`, whose Gram matrix has
/// eigenvalues `1 - σ_i²(UᵀV)`, so that `||R||_F² = K - ||UᵀV||_F²` and
/// `||R||₂² = 1 - σ_min²`. This avoids the cancellation in `K - ||UᵀV||_F²`
/// for nearly equal subspaces.
pub fn sin_theta<T: Scalar>(u: &OrthonormalBasis<T>, v: &OrthonormalBasis<T>) -> Result<SinTheta<T>> {
    if u.n() != v.n() || u.k() != v.k() {
        return Err(Error::Dimension(format!(
            "sinΘ needs equal shapes, got {}x{} and {}x{}",
            u.n(),
            u.k(),
            v.n(),
            v.k()
        )));
    }
    let cross = u.columns().t().dot(v.columns());
    let resid = v.columns() - &u.columns().dot(&cross);
    let rtr = resid.t().dot(&resid);
    let frob2: T = resid.iter().map(|&x| x * x).sum();
    let k = u.k();
    let flat: Vec<T> = rtr.iter().copied().collect();
    let eig = symmetric_eigen(k, &flat)?;
    let top = eig.values.last().copied().unwrap_or_else(T::zero);
    let spectral = top.max(T::zero()).min(T::one()).sqrt();
    let frobenius = frob2.max(T::zero()).sqrt();
    Ok(SinTheta { spectral, frobenius })
}

/// Rank suggestion from the largest ratio of consecutive values.
///
/// Returns the `k ∈ [1, k_max]` maximizing `sigma[k-1] / max(sigma[k], 1e-12·sigma[0])`,
/// preferring the smallest `k` on ties.
pub fn eigengap_select<T: Scalar>(sigma: &[T], k_max: usize) -> Result<usize> {
    if sigma.is_empty() {
        return Err(Error::Input("eigengap selection on an empty spectrum".into()));
    }
    if k_max == 0 || k_max >= sigma.len() {
        return Err(Error::Dimension(format!(
            "k_max={k_max} must lie in [1, {}]",
            sigma.len() - 1
        )));
    }
    if sigma.iter().any(|s| !s.is_finite()) || sigma[0] <= T::zero() {
        return Err(Error::Input("spectrum must be finite with a positive leading value".into()));
    }
    if sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Input("spectrum must be sorted non-increasing".into()));
    }
    let floor = sigma[0] * T::lit(1e-12);
    let mut best = 1;
    let mut best_ratio = T::neg_infinity();
    for k in 1..=k_max {
        let ratio = sigma[k - 1] / sigma[k].max(floor);
        if ratio > best_ratio {
            best_ratio = ratio;
            best = k;
        }
    }
    Ok(best)
}

/// Gram matrix `G(l, l') = ||U_lᵀ U_l'||_F²`, the inner products of the
/// vectorized projectors `vec(U_l U_lᵀ)`.
pub fn gram_from_bases<T: Scalar>(bases: &[OrthonormalBasis<T>]) -> Result<SymmetricMatrix<T>> {
    let l = bases.len();
    if l == 0 {
        return Err(Error::Input("no bases supplied".into()));
    }
    let n = bases[0].n();
    if let Some((idx, b)) = bases.iter().enumerate().find(|(_, b)| b.n() != n) {
        return Err(Error::Dimension(format!(
            "basis {idx} has ambient dimension {}, expected {n}",
            b.n()
        )));
    }
    let mut g = Array2::zeros((l, l));
    for a in 0..l {
        for b in a..l {
            let v = if a == b {
                T::from_usize(bases[a].k()).unwrap()
            } else {
                let cross = bases[a].columns().t().dot(bases[b].columns());
                cross.iter().map(|&x| x * x).sum()
            };
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    Ok(SymmetricMatrix::from_array_unchecked(g))
}
