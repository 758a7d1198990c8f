//! Dense complex linear algebra.
//!
//! [`DenseMatrix`] is a plain row-major container. The heavy lifting for SVD
//! and full eigendecompositions is delegated to `faer`; the dominant-eigenpair
//! solver in [`iterative`] works matrix-free through a callback so that
//! transfer matrices never have to be materialized at large bond dimension.

mod dense;
mod iterative;

pub use dense::{eig_dense, eig_dense_capped, eigh, hermitian_eigenvalues, svd, svd_jacobi, SvdResult};
pub use iterative::{dominant_eigs, dominant_eigs_dense, IterOptions};

use std::ops::{Index, IndexMut};

use faer::{Accum, MatMut, MatRef, Par};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default upper bound on the dimension handed to the dense eigensolver.
pub const DENSE_CAP: usize = 4096;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&mut self, factor: C64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        {
            let dst = MatMut::from_row_major_slice_mut(&mut out.data, self.rows, rhs.cols);
            faer::linalg::matmul::matmul(dst, Accum::Replace, self.view(), rhs.view(), ONE, Par::Seq);
        }
        out
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub(crate) fn view(&self) -> MatRef<'_, C64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub(crate) fn from_faer(m: MatRef<'_, C64>) -> Self {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenpairs sorted by descending magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSet {
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors aligned with `values`.
    pub vectors: Vec<Vec<C64>>,
    /// Set when the matrix looked defective: values are trustworthy, the
    /// vectors are not.
    pub values_only: bool,
}

impl EigenSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

// Small vector helpers shared across the crate.

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn normalize(a: &mut [C64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        for z in a.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Rotate `v` so that its largest-magnitude component is real and positive.
/// The first index wins among exact ties.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        for z in v.iter_mut() {
            *z *= phase;
        }
        v[best] = C64::new(v[best].re, 0.0);
    }
}

/// Order eigenvalues by descending magnitude; near-equal magnitudes are
/// ordered by descending real part, then descending imaginary part.
pub(crate) fn spectral_order(values: &[C64]) -> Vec<usize> {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-12 * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].norm().total_cmp(&values[a].norm()).then(a.cmp(&b)));
    refine_groups(&mut idx, tol, |i| values[i].norm(), |a, b| {
        values[b].re.total_cmp(&values[a].re).then(a.cmp(&b))
    });
    // within equal-magnitude runs, equal real parts go by imaginary part
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len()
            && (values[idx[end]].norm() - values[idx[end - 1]].norm()).abs() <= tol
            && (values[idx[end]].re - values[idx[end - 1]].re).abs() <= tol
        {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| values[b].im.total_cmp(&values[a].im).then(a.cmp(&b)));
        start = end;
    }
    idx
}

/// Re-sort maximal runs whose consecutive keys differ by at most `tol`.
fn refine_groups(
    idx: &mut [usize],
    tol: f64,
    key: impl Fn(usize) -> f64,
    cmp: impl Fn(usize, usize) -> std::cmp::Ordering,
) {
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && (key(idx[end]) - key(idx[end - 1])).abs() <= tol {
            end += 1;
        }
        idx[start..end].sort_by(|&a, &b| cmp(a, b));
        start = end;
    }
}
