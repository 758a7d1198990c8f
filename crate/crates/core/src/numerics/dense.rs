use faer::Side;

use super::{fix_phase, normalize, spectral_order, DenseMatrix, EigenSet, C64, DENSE_CAP};
use crate::error::{Error, Result};

/// Thin SVD `A = U · diag(S) · Vh`.
#[derive(Clone, Debug)]
pub struct SvdResult {
    pub u: DenseMatrix,
    /// Non-negative, descending.
    pub s: Vec<f64>,
    pub vh: DenseMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        let k = self.s.len();
        for i in 0..us.rows() {
            for j in 0..k {
                us[(i, j)] *= self.s[j];
            }
        }
        us.matmul(&self.vh)
    }
}

pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("svd of a matrix with non-finite entries".into()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(SvdResult {
            u: DenseMatrix::zeros(a.rows(), 0),
            s: Vec::new(),
            vh: DenseMatrix::zeros(0, a.cols()),
        });
    }
    let dec = a
        .view()
        .thin_svd()
        .map_err(|e| Error::NumericalBreakdown(format!("svd failed: {e:?}")))?;
    let s: Vec<f64> = dec.S().column_vector().iter().map(|z| z.re.max(0.0)).collect();
    let v = dec.V();
    Ok(SvdResult {
        u: DenseMatrix::from_faer(dec.U()),
        vh: DenseMatrix::from_fn(v.ncols(), v.nrows(), |i, j| v[(j, i)].conj()),
        s,
    })
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Slower than [`svd`] but accurate to working precision *relative to each
/// singular value* for matrices of the form `D₁ B D₂` with `B` well
/// conditioned and `D₁, D₂` diagonal, such as bond matrices of a nearly
/// canonical MPS.
pub fn svd_jacobi(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("svd of a matrix with non-finite entries".into()));
    }
    if a.rows() < a.cols() {
        let t = svd_jacobi(&a.adjoint())?;
        return Ok(SvdResult { u: t.vh.adjoint(), s: t.s, vh: t.u.adjoint() });
    }
    let (m, n) = (a.rows(), a.cols());
    // columns of G and V, stored column-major for cheap column access
    let mut g: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    for _sweep in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = g[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = g[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = g[p].iter().zip(&g[q]).map(|(x, y)| x.conj() * y).sum();
                let gabs = gamma.norm();
                if gabs == 0.0 || gabs <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for cols in [&mut g, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let yq = *y * phase;
                        let xp = *x;
                        *x = xp * c - yq * sn;
                        *y = xp * sn + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sv: Vec<f64> = g.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));
    let u = DenseMatrix::from_fn(m, n, |r, k| {
        let j = order[k];
        if sv[j] > 0.0 {
            g[j][r] / sv[j]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let vh = DenseMatrix::from_fn(n, n, |k, c| v[order[k]][c].conj());
    Ok(SvdResult { u, s: order.iter().map(|&j| sv[j]).collect(), vh })
}

const JACOBI_SWEEPS: usize = 60;

/// Full eigendecomposition of a general complex matrix with the default
/// dimension cap.
pub fn eig_dense(a: &DenseMatrix) -> Result<EigenSet> {
    eig_dense_capped(a, DENSE_CAP)
}

pub fn eig_dense_capped(a: &DenseMatrix, cap: usize) -> Result<EigenSet> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("eig of non-square {}x{} matrix", a.rows(), a.cols())));
    }
    if a.rows() > cap {
        return Err(Error::TooLarge { dim: a.rows(), cap });
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("eig of a matrix with non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenSet { values: vec![], vectors: vec![], values_only: false });
    }
    let dec = a
        .view()
        .eigen()
        .map_err(|e| Error::NumericalBreakdown(format!("eigendecomposition failed: {e:?}")))?;
    let raw_vals: Vec<C64> = dec.S().column_vector().iter().copied().collect();
    let u = dec.U();
    let order = spectral_order(&raw_vals);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &i in &order {
        let mut v: Vec<C64> = (0..n).map(|r| u[(r, i)]).collect();
        normalize(&mut v);
        fix_phase(&mut v);
        values.push(raw_vals[i]);
        vectors.push(v);
    }
    let values_only = looks_defective(a, &values, &vectors);
    Ok(EigenSet { values, vectors, values_only })
}

/// Residual test plus a linear-independence test within clusters of
/// (nearly) equal eigenvalues; a defective matrix yields parallel vectors
/// for a repeated eigenvalue even when each residual is tiny.
fn looks_defective(a: &DenseMatrix, values: &[C64], vectors: &[Vec<C64>]) -> bool {
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let n = values.len();
    let v = DenseMatrix::from_fn(n, n, |r, c| vectors[c][r]);
    let av = a.matmul(&v);
    for (c, val) in values.iter().enumerate() {
        let res: f64 = (0..n).map(|r| (av[(r, c)] - val * v[(r, c)]).norm_sqr()).sum::<f64>().sqrt();
        if res > 1e-8 * scale {
            return true;
        }
    }
    // runs of consecutive (in spectral order) nearly equal eigenvalues
    let tol = 1e-6 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[end - 1]).norm() <= tol {
            end += 1;
        }
        let cluster: Vec<usize> = (start..end).collect();
        start = end;
        if cluster.len() > 1 {
            let g = DenseMatrix::from_fn(cluster.len(), cluster.len(), |p, q| {
                super::dot(&vectors[cluster[p]], &vectors[cluster[q]])
            });
            let smallest = hermitian_eigenvalues(&g).map(|ev| ev.last().copied().unwrap_or(1.0));
            if smallest.map_or(true, |s| s < 1e-8) {
                return true;
            }
        }
    }
    false
}

/// Eigendecomposition of a Hermitian matrix (lower triangle is read).
/// Values are returned in descending order; column `j` of the matrix holds
/// the eigenvector of value `j`.
pub fn eigh(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if !a.is_square() {
        return Err(Error::InvalidInput("eigh of non-square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("eigh of a matrix with non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok((vec![], DenseMatrix::zeros(0, 0)));
    }
    let dec = a
        .view()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NumericalBreakdown(format!("hermitian eigendecomposition failed: {e:?}")))?;
    let s = dec.S().column_vector();
    let u = dec.U();
    let vals: Vec<f64> = (0..n).rev().map(|i| s[i].re).collect();
    let vecs = DenseMatrix::from_fn(n, n, |r, c| u[(r, n - 1 - c)]);
    Ok((vals, vecs))
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::InvalidInput("eigenvalues of non-square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("eigenvalues of a matrix with non-finite entries".into()));
    }
    if a.rows() == 0 {
        return Ok(vec![]);
    }
    let mut vals = a
        .view()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NumericalBreakdown(format!("hermitian eigenvalues failed: {e:?}")))?;
    vals.reverse();
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_row_major(rows, cols, v.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
    }

    #[test]
    fn svd_identity() {
        let r = svd(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(r.s.len(), 3);
        for s in r.s {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_diag_with_zero() {
        let r = svd(&real(2, 2, &[3.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((r.s[0] - 3.0).abs() < 1e-14);
        assert!(r.s[1].abs() < 1e-14);
    }

    #[test]
    fn svd_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DenseMatrix::from_fn(4, 3, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let r = svd(&a).unwrap();
        assert!(r.reconstruct().max_abs_diff(&a) < 1e-10 * a.frobenius_norm());
        assert!(r.s.windows(2).all(|w| w[0] >= w[1]));
        // orthonormal columns of U and rows of Vh
        let utu = r.u.adjoint().matmul(&r.u);
        let vvh = r.vh.matmul(&r.vh.adjoint());
        assert!(utu.max_abs_diff(&DenseMatrix::identity(3)) < 1e-10);
        assert!(vvh.max_abs_diff(&DenseMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn svd_rejects_nan() {
        let mut a = DenseMatrix::identity(2);
        a[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(svd(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn jacobi_keeps_relative_accuracy_on_graded_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = DenseMatrix::from_fn(4, 4, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let q = svd(&raw).unwrap().u;
        let d = [1.0, 1e-4, 1e-9, 1e-13];
        let a = DenseMatrix::from_fn(4, 4, |i, j| q[(i, j)] * d[j]);
        let r = svd_jacobi(&a).unwrap();
        for (got, want) in r.s.iter().zip(d) {
            assert!((got / want - 1.0).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(r.reconstruct().max_abs_diff(&a) < 1e-14);
        let wide = DenseMatrix::from_fn(2, 3, |i, j| C64::new(i as f64 + 1.0, j as f64 - 1.0));
        assert!(svd_jacobi(&wide).unwrap().reconstruct().max_abs_diff(&wide) < 1e-13);
    }

    #[test]
    fn eig_identity() {
        let e = eig_dense(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(e.values, vec![ONE, ONE]);
        assert!(!e.values_only);
    }

    #[test]
    fn eig_nilpotent_is_flagged() {
        let a = DenseMatrix::from_row_major(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        let e = eig_dense(&a).unwrap();
        assert!(e.values.iter().all(|v| v.norm() < 1e-12));
        assert!(e.values_only);
    }

    #[test]
    fn eig_companion_of_z2_minus_1() {
        let a = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = eig_dense(&a).unwrap();
        assert!((e.values[0] - ONE).norm() < 1e-14);
        assert!((e.values[1] + ONE).norm() < 1e-14);
    }

    #[test]
    fn eig_over_cap_rejected() {
        assert!(matches!(eig_dense_capped(&DenseMatrix::identity(5), 4), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn eig_residuals_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DenseMatrix::from_fn(6, 6, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let e = eig_dense(&a).unwrap();
        for (v, x) in e.values.iter().zip(&e.vectors) {
            let ax = a.matvec(x);
            let res: f64 = ax.iter().zip(x).map(|(p, q)| (p - v * q).norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-8 * a.frobenius_norm());
        }
        assert!(e.values.windows(2).all(|w| w[0].norm() >= w[1].norm() - 1e-12));
        assert_eq!(e, eig_dense(&a).unwrap());
    }

    #[test]
    fn eigh_descending() {
        let a = real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (vals, vecs) = eigh(&a).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] - 1.0).abs() < 1e-14);
        let v0 = vecs.column(0);
        assert!((v0[0].norm() - v0[1].norm()).abs() < 1e-12);
        assert_eq!(hermitian_eigenvalues(&a).unwrap().len(), 2);
    }
}
