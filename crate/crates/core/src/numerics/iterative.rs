//! Restarted block-Krylov solver for the largest-magnitude eigenpairs of a
//! linear map that is only available as a callback.
//!
//! Each cycle grows an orthonormal basis `V` from the current block by
//! repeated application of the map, performs a Rayleigh–Ritz projection
//! `H = V†AV`, and restarts from the leading Ritz vectors. Because `AV` is
//! kept explicitly the residuals are exact, not estimated from a Hessenberg
//! recurrence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, eig_dense, fix_phase, normalize, spectral_order, DenseMatrix, EigenSet, C64, ZERO};
use crate::error::{Error, Partial, Result};

#[derive(Clone, Debug)]
pub struct IterOptions {
    /// Relative residual `‖Ax − θx‖ / |θ₁|` required for every wanted pair.
    pub tol: f64,
    pub max_restarts: usize,
    /// Krylov basis size per cycle; `None` picks from `k`.
    pub basis: Option<usize>,
    pub seed: u64,
}

impl Default for IterOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_restarts: 2000, basis: None, seed: 0x5eed }
    }
}

/// Top-`k` eigenpairs (by magnitude) of the map `apply: x ↦ A·x` on `C^dim`.
pub fn dominant_eigs<F>(apply: F, dim: usize, k: usize, opts: &IterOptions) -> Result<EigenSet>
where
    F: Fn(&[C64], &mut [C64]),
{
    if k == 0 || k > dim {
        return Err(Error::InvalidInput(format!("need 1 <= k <= dim, got k={k}, dim={dim}")));
    }
    let block = (k + 2).min(dim);
    let basis_cap = opts.basis.unwrap_or_else(|| (4 * block).max(2 * k + 8).max(24)).clamp(block, dim);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Vec<C64>> = (0..block).map(|_| random_vec(&mut rng, dim)).collect();
    let mut best: Option<EigenSet> = None;

    for _cycle in 0..opts.max_restarts.max(1) {
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(basis_cap);
        let mut av: Vec<Vec<C64>> = Vec::with_capacity(basis_cap);
        let mut pending = orthonormalize_against(&v, start, dim);
        if pending.is_empty() {
            pending = vec![random_vec(&mut rng, dim)];
            pending = orthonormalize_against(&v, pending, dim);
        }
        while !pending.is_empty() {
            let room = basis_cap - v.len();
            pending.truncate(room);
            let mut images = Vec::with_capacity(pending.len());
            for x in &pending {
                let mut y = vec![ZERO; dim];
                apply(x, &mut y);
                images.push(y);
            }
            v.extend(pending);
            av.extend(images.iter().cloned());
            if v.len() >= basis_cap {
                break;
            }
            pending = orthonormalize_against(&v, images, dim);
        }

        let m = v.len();
        let h = DenseMatrix::from_fn(m, m, |i, j| dot(&v[i], &av[j]));
        let ritz = eig_dense(&h)?;
        let want = k.min(m);
        let mut values = Vec::with_capacity(m);
        let mut vectors = Vec::with_capacity(m);
        let mut residuals = Vec::with_capacity(m);
        for (theta, y) in ritz.values.iter().zip(&ritz.vectors) {
            let mut x = vec![ZERO; dim];
            let mut ax = vec![ZERO; dim];
            for (j, &yj) in y.iter().enumerate() {
                for i in 0..dim {
                    x[i] += v[j][i] * yj;
                    ax[i] += av[j][i] * yj;
                }
            }
            let nx = normalize(&mut x);
            let r: f64 = ax.iter().zip(&x).map(|(a, b)| (a / nx - theta * b).norm_sqr()).sum::<f64>().sqrt();
            values.push(*theta);
            vectors.push(x);
            residuals.push(r);
        }
        let scale = values.first().map_or(0.0, |t| t.norm()).max(f64::MIN_POSITIVE);
        let converged = residuals[..want].iter().all(|&r| r <= opts.tol * scale) || m == dim;

        let mut out_vecs: Vec<Vec<C64>> = vectors[..want].to_vec();
        for x in &mut out_vecs {
            fix_phase(x);
        }
        let current = EigenSet { values: values[..want].to_vec(), vectors: out_vecs, values_only: false };
        if converged {
            return Ok(finalize(current));
        }
        best = Some(current);
        start = vectors.into_iter().take(block).collect();
    }
    Err(Error::IterationLimit {
        what: "dominant_eigs",
        iterations: opts.max_restarts,
        best: Partial::Eigen(Box::new(finalize(best.expect("at least one cycle ran")))),
    })
}

/// Convenience wrapper running [`dominant_eigs`] on an explicit matrix.
pub fn dominant_eigs_dense(a: &DenseMatrix, k: usize, opts: &IterOptions) -> Result<EigenSet> {
    if !a.is_square() {
        return Err(Error::InvalidInput("dominant_eigs of non-square matrix".into()));
    }
    dominant_eigs(|x, y| y.copy_from_slice(&a.matvec(x)), a.rows(), k, opts)
}

fn finalize(set: EigenSet) -> EigenSet {
    let order = spectral_order(&set.values);
    EigenSet {
        values: order.iter().map(|&i| set.values[i]).collect(),
        vectors: order.iter().map(|&i| set.vectors[i].clone()).collect(),
        values_only: set.values_only,
    }
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
}

/// Two passes of modified Gram–Schmidt against `basis` and among the new
/// vectors; vectors that lose almost all of their norm are dropped.
fn orthonormalize_against(basis: &[Vec<C64>], vecs: Vec<Vec<C64>>, dim: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vecs.len());
    for mut x in vecs {
        let n0 = super::norm(&x);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in basis.iter().chain(out.iter()) {
                let c = dot(q, &x);
                for i in 0..dim {
                    x[i] -= c * q[i];
                }
            }
        }
        let n1 = normalize(&mut x);
        if n1 > 1e-10 * n0 {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ONE;

    #[test]
    fn diag_top_one() {
        let a = DenseMatrix::from_diag(&[C64::new(2.0, 0.0), ONE]);
        let e = dominant_eigs_dense(&a, 1, &IterOptions::default()).unwrap();
        assert!((e.values[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn identity_map_all_ones() {
        for k in 1..=5 {
            let e = dominant_eigs(|x, y| y.copy_from_slice(x), 40, k, &IterOptions::default()).unwrap();
            assert_eq!(e.len(), k);
            assert!(e.values.iter().all(|v| (v - ONE).norm() < 1e-12));
        }
    }

    #[test]
    fn bad_k_rejected() {
        assert!(dominant_eigs(|x, y| y.copy_from_slice(x), 3, 4, &IterOptions::default()).is_err());
        assert!(dominant_eigs(|x, y| y.copy_from_slice(x), 3, 0, &IterOptions::default()).is_err());
    }

    #[test]
    fn large_diagonal_converges_with_restarts() {
        let dim = 300;
        let diag: Vec<C64> = (0..dim).map(|i| C64::new(0.99f64.powi(i as i32), 0.0)).collect();
        let e = dominant_eigs(
            |x, y| {
                for i in 0..dim {
                    y[i] = diag[i] * x[i];
                }
            },
            dim,
            3,
            &IterOptions::default(),
        )
        .unwrap();
        for i in 0..3 {
            assert!((e.values[i] - diag[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn iteration_limit_carries_estimate() {
        let dim = 400;
        let opts = IterOptions { max_restarts: 1, basis: Some(6), ..Default::default() };
        let err = dominant_eigs(
            |x, y| {
                for i in 0..dim {
                    y[i] = x[i] * (1.0 - 1e-4 * i as f64);
                }
            },
            dim,
            2,
            &opts,
        )
        .unwrap_err();
        match err {
            Error::IterationLimit { best: Partial::Eigen(e), .. } => assert_eq!(e.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
