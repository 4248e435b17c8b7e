//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit QL iterations with Wilkinson-style shifts (the EISPACK
//! `tred2`/`tql2` pair).

// Index loops mirror the reference algorithm.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Full eigendecomposition of a dense symmetric matrix.
///
/// `values` are sorted ascending; `vectors` is column-major, so eigenvector
/// `j` is `vectors[j * n..(j + 1) * n]`.
#[derive(Debug, Clone)]
pub struct DenseEigen<T> {
    pub n: usize,
    pub values: Vec<T>,
    pub vectors: Vec<T>,
}

impl<T: Scalar> DenseEigen<T> {
    pub fn vector(&self, j: usize) -> &[T] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }
}

/// Column-major working matrix `v[(row, col)] = data[col * n + row]`.
struct Work<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Work<T> {
    #[inline]
    fn get(&self, r: usize, c: usize) -> T {
        self.data[c * self.n + r]
    }
    #[inline]
    fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[c * self.n + r] = v;
    }
}

/// Decomposes the symmetric matrix given in row-major `a` (only symmetry of
/// the input is assumed, both triangles are read).
pub fn symmetric_eigen<T: Scalar>(n: usize, a: &[T]) -> Result<DenseEigen<T>> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(DenseEigen {
            n,
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    // Symmetric input: row-major and column-major layouts coincide.
    let mut v = Work {
        n,
        data: a.to_vec(),
    };
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    // Selection sort keeps the pairing and is stable for ties.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            for r in 0..n {
                v.data.swap(i * n + r, k * n + r);
            }
        }
    }
    Ok(DenseEigen {
        n,
        values: d,
        vectors: v.data,
    })
}

fn tred2<T: Scalar>(v: &mut Work<T>, d: &mut [T], e: &mut [T]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
                v.set(j, i, T::zero());
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    let vkj = v.get(k, j);
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, T::zero());
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        let vii = v.get(i, i);
        v.set(n - 1, i, vii);
        v.set(i, i, T::one());
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let val = v.get(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, T::zero());
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, T::zero());
    }
    v.set(n - 1, n - 1, T::one());
    e[0] = T::zero();
}

fn tql2<T: Scalar>(v: &mut Work<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let max_sweeps = 30 * n.max(1) + 30;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::Numerical(
                        "symmetric QL iteration did not converge".into(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = v.data.split_at_mut((i + 1) * n);
                    let col_i = &mut left[i * n..];
                    let col_i1 = &mut right[..n];
                    for (vi, vi1) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let hk = *vi1;
                        *vi1 = s * *vi + c * hk;
                        *vi = c * *vi - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}
