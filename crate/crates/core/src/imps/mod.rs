//! Translationally invariant infinite MPS in canonical (Vidal) form.
//!
//! The state is `… Γ Λ Γ Λ Γ …` with one site tensor `Γ` (`d` matrices of
//! size `chi × chi`) and one bond vector `λ` of Schmidt coefficients.
//! Lengths are in lattice units; the short-distance cutoff is 1.

mod block;
mod io;

pub use block::{
    block_tensor, block_tensor_capped, reduced_density_spectrum, reduced_density_spectrum_dense,
    reduced_density_spectrum_from_transfer, reduced_density_spectrum_transfer, schmidt_entropy,
    BlockSpectrum, BlockTensor, BLOCK_CAP,
};
pub use io::{read_state, write_state, StateFile};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{dominant_eigs, eigh, svd_jacobi, DenseMatrix, IterOptions, C64, ZERO};

/// Schmidt values below `SCHMIDT_FLOOR · λ₁` are dropped by
/// [`canonicalize`]. In double precision the isometry residuals of the Vidal
/// form grow like `ε / λ_min`, so smaller values cannot be kept at 1e-8
/// residuals; the discarded weight is below 1e-16.
pub const SCHMIDT_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct InfiniteMps {
    d: usize,
    chi: usize,
    /// `gamma[(s * chi + a) * chi + b]`
    gamma: Vec<C64>,
    lambda: Vec<f64>,
}

impl InfiniteMps {
    /// Wraps raw data after a shape check. No canonical-form check is made;
    /// use [`canonicalize`] for arbitrary input.
    pub fn from_parts(d: usize, chi: usize, gamma: Vec<C64>, lambda: Vec<f64>) -> Result<Self> {
        if d < 1 || chi < 1 {
            return Err(Error::InvalidInput(format!("d={d}, chi={chi}")));
        }
        if gamma.len() != d * chi * chi || lambda.len() != chi {
            return Err(Error::InvalidInput(format!(
                "gamma has {} entries and lambda {}, expected {} and {chi}",
                gamma.len(),
                lambda.len(),
                d * chi * chi
            )));
        }
        if gamma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || lambda.iter().any(|x| !x.is_finite() || *x <= 0.0)
        {
            return Err(Error::InvalidInput("non-finite gamma or non-positive lambda".into()));
        }
        Ok(Self { d, chi, gamma, lambda })
    }

    /// The product state `|v⟩^{⊗∞}`.
    pub fn product(v: &[C64]) -> Result<Self> {
        let n = crate::numerics::norm(v);
        if n == 0.0 {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        Self::from_parts(v.len(), 1, v.iter().map(|z| z / n).collect(), vec![1.0])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn chi(&self) -> usize {
        self.chi
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Largest Schmidt coefficient.
    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }

    /// Lattice spacing; fixed.
    pub fn eps(&self) -> f64 {
        1.0
    }

    pub fn gamma_raw(&self) -> &[C64] {
        &self.gamma
    }

    #[inline]
    pub fn gamma(&self, s: usize, a: usize, b: usize) -> C64 {
        self.gamma[(s * self.chi + a) * self.chi + b]
    }

    pub fn gamma_matrix(&self, s: usize) -> DenseMatrix {
        let n = self.chi * self.chi;
        DenseMatrix::from_row_major(self.chi, self.chi, self.gamma[s * n..(s + 1) * n].to_vec())
            .expect("shape is consistent")
    }

    /// `(‖Σ_s Γ Λ² Γ† − I‖, ‖Σ_s Γ† Λ² Γ − I‖)` in max-entry norm.
    pub fn canonical_residuals(&self) -> (f64, f64) {
        let chi = self.chi;
        let mut right = DenseMatrix::zeros(chi, chi);
        let mut left = DenseMatrix::zeros(chi, chi);
        for s in 0..self.d {
            for a in 0..chi {
                for a2 in 0..chi {
                    let mut r = ZERO;
                    let mut l = ZERO;
                    for b in 0..chi {
                        let w = self.lambda[b] * self.lambda[b];
                        r += self.gamma(s, a, b) * self.gamma(s, a2, b).conj() * w;
                        l += self.gamma(s, b, a).conj() * self.gamma(s, b, a2) * w;
                    }
                    right[(a, a2)] += r;
                    left[(a, a2)] += l;
                }
            }
        }
        let id = DenseMatrix::identity(chi);
        (right.max_abs_diff(&id), left.max_abs_diff(&id))
    }

    pub fn is_canonical(&self, tol: f64) -> bool {
        let (r, l) = self.canonical_residuals();
        let norm: f64 = self.lambda.iter().map(|x| x * x).sum();
        r <= tol && l <= tol && (norm - 1.0).abs() <= 1e-12_f64.max(tol * 1e-4)
    }

    /// Single-site reduced density matrix `ρ[s][s']`; canonical form assumed.
    pub fn site_density(&self) -> DenseMatrix {
        let chi = self.chi;
        DenseMatrix::from_fn(self.d, self.d, |s, t| {
            let mut acc = ZERO;
            for a in 0..chi {
                for b in 0..chi {
                    let w = (self.lambda[a] * self.lambda[b]).powi(2);
                    acc += self.gamma(s, a, b) * self.gamma(t, a, b).conj() * w;
                }
            }
            acc
        })
    }

    /// `⟨O⟩` for a single-site operator given as a `d × d` matrix.
    pub fn expectation(&self, op: &DenseMatrix) -> C64 {
        self.site_density().matmul(op).trace()
    }
}

/// Random canonical state; deterministic in `seed`.
pub fn random_imps(seed: u64, d: usize, chi: usize) -> Result<InfiniteMps> {
    if d < 2 || chi < 1 {
        return Err(Error::InvalidInput(format!("random_imps needs d >= 2 and chi >= 1, got d={d}, chi={chi}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma: Vec<C64> = (0..d * chi * chi)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let lambda: Vec<f64> = (0..chi).map(|_| 0.2 + rng.random::<f64>()).collect();
    canonicalize(d, &gamma, &lambda)
}

/// Brings `… Γ Λ Γ Λ …` (arbitrary gauge and normalization) into canonical
/// form with descending Schmidt coefficients and fixed phases.
pub fn canonicalize(d: usize, gamma: &[C64], lambda: &[f64]) -> Result<InfiniteMps> {
    let chi = lambda.len();
    if d < 1 || chi < 1 || gamma.len() != d * chi * chi {
        return Err(Error::InvalidInput(format!(
            "canonicalize: gamma has {} entries, expected d*chi*chi = {}",
            gamma.len(),
            d * chi * chi
        )));
    }
    if gamma.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("canonicalize: non-finite input".into()));
    }
    if lambda.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidInput("canonicalize: negative bond weight".into()));
    }
    let mut mps = canonical_pass(d, chi, gamma, lambda)?;
    let mut res = max_residual(&mps);
    // later passes start from good Schmidt values, where the environments
    // are close to the identity and the fixed points come out more accurately
    for _ in 1..MAX_PASSES {
        if res <= 1e-11 {
            break;
        }
        let next = canonical_pass(d, mps.chi, &mps.gamma, &mps.lambda)?;
        let r = max_residual(&next);
        if r >= res {
            break;
        }
        (mps, res) = (next, r);
    }
    if !(res <= BREAKDOWN_RESIDUAL) {
        return Err(Error::NumericalBreakdown(format!("canonical form not reached, residual {res:e}")));
    }
    fix_gauge(&mut mps);
    Ok(mps)
}

const MAX_PASSES: usize = 4;
/// Residual above which the result is treated as a failure rather than as
/// limited precision.
const BREAKDOWN_RESIDUAL: f64 = 1e-6;

fn max_residual(mps: &InfiniteMps) -> f64 {
    let (r, l) = mps.canonical_residuals();
    r.max(l)
}

/// One round of the fixed-point construction. Conditioning is best when
/// `lambda` is close to the true Schmidt values, since both environments are
/// then close to the identity.
fn canonical_pass(d: usize, chi: usize, gamma: &[C64], lambda: &[f64]) -> Result<InfiniteMps> {
    let n = chi * chi;
    let mats: Vec<DenseMatrix> = (0..d)
        .map(|s| DenseMatrix::from_row_major(chi, chi, gamma[s * n..(s + 1) * n].to_vec()).unwrap())
        .collect();
    let lam = DenseMatrix::from_diag(&lambda.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    // A = ΓΛ (right environment), B = ΛΓ (left environment)
    let a: Vec<DenseMatrix> = mats.iter().map(|g| g.matmul(&lam)).collect();
    let b: Vec<DenseMatrix> = mats.iter().map(|g| lam.matmul(g)).collect();
    let a_adj: Vec<DenseMatrix> = a.iter().map(|m| m.adjoint()).collect();
    let b_adj: Vec<DenseMatrix> = b.iter().map(|m| m.adjoint()).collect();
    let scale: f64 = a.iter().map(|m| m.frobenius_norm().powi(2)).sum();

    let right_map = |x: &[C64], y: &mut [C64]| {
        let xm = DenseMatrix::from_row_major(chi, chi, x.to_vec()).unwrap();
        let mut acc = DenseMatrix::zeros(chi, chi);
        for s in 0..d {
            let t = a[s].matmul(&xm).matmul(&a_adj[s]);
            add_into(&mut acc, &t);
        }
        y.copy_from_slice(acc.entries());
    };
    let left_map = |x: &[C64], y: &mut [C64]| {
        let xm = DenseMatrix::from_row_major(chi, chi, x.to_vec()).unwrap();
        let mut acc = DenseMatrix::zeros(chi, chi);
        for s in 0..d {
            let t = b_adj[s].matmul(&xm).matmul(&b[s]);
            add_into(&mut acc, &t);
        }
        y.copy_from_slice(acc.entries());
    };
    let opts = IterOptions { tol: 1e-13, ..Default::default() };
    let re = dominant_eigs(right_map, n, 1, &opts).or_else(accept_best)?;
    let le = dominant_eigs(left_map, n, 1, &opts).or_else(accept_best)?;
    let eta = re.values[0];
    if !(eta.norm() > 1e-14 * scale) || eta.re <= 0.0 {
        return Err(Error::DegenerateState(eta.norm()));
    }

    let rmat = hermitian_psd(&re.vectors[0], chi);
    let lmat = hermitian_psd(&le.vectors[0], chi);
    // R = X X†, l = Y† Y restricted to their supports
    let (rv, rw) = eigh(&rmat)?;
    let (lv, lw) = eigh(&lmat)?;
    let keep_r: Vec<usize> = (0..chi).filter(|&i| rv[i] > 1e-14 * rv[0]).collect();
    let keep_l: Vec<usize> = (0..chi).filter(|&i| lv[i] > 1e-14 * lv[0]).collect();
    let x = DenseMatrix::from_fn(chi, keep_r.len(), |i, j| rw[(i, keep_r[j])] * rv[keep_r[j]].sqrt());
    let x_pinv = DenseMatrix::from_fn(keep_r.len(), chi, |i, j| rw[(j, keep_r[i])].conj() / rv[keep_r[i]].sqrt());
    let y = DenseMatrix::from_fn(keep_l.len(), chi, |i, j| lw[(j, keep_l[i])].conj() * lv[keep_l[i]].sqrt());
    let y_pinv = DenseMatrix::from_fn(chi, keep_l.len(), |i, j| lw[(i, keep_l[j])] / lv[keep_l[j]].sqrt());

    let c = y.matmul(&lam).matmul(&x);
    let dec = svd_jacobi(&c)?;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    if !(smax > 0.0) {
        return Err(Error::DegenerateState(0.0));
    }
    let kept = dec.s.iter().take_while(|&&s| s > SCHMIDT_FLOOR * smax).count();
    let s_norm: f64 = dec.s[..kept].iter().map(|s| s * s).sum::<f64>().sqrt();
    let new_lambda: Vec<f64> = dec.s[..kept].iter().map(|s| s / s_norm).collect();
    let u = DenseMatrix::from_fn(dec.u.rows(), kept, |i, j| dec.u[(i, j)]);
    let vh = DenseMatrix::from_fn(kept, dec.vh.cols(), |i, j| dec.vh[(i, j)]);
    let left = vh.matmul(&x_pinv);
    let right = y_pinv.matmul(&u);

    let mut new_gamma = Vec::with_capacity(d * kept * kept);
    for g in &mats {
        new_gamma.extend_from_slice(left.matmul(g).matmul(&right).entries());
    }
    // fix the overall scale so the right isometry condition holds exactly in trace
    let mut mps = InfiniteMps { d, chi: kept, gamma: new_gamma, lambda: new_lambda };
    let mut tr = 0.0;
    for s in 0..d {
        for a in 0..kept {
            for b in 0..kept {
                tr += mps.gamma(s, a, b).norm_sqr() * mps.lambda[b] * mps.lambda[b];
            }
        }
    }
    let f = (kept as f64 / tr).sqrt();
    for z in &mut mps.gamma {
        *z *= f;
    }
    Ok(mps)
}

fn accept_best(e: Error) -> Result<crate::numerics::EigenSet> {
    match e {
        Error::IterationLimit { best: crate::error::Partial::Eigen(set), .. } => Ok(*set),
        other => Err(other),
    }
}

fn add_into(acc: &mut DenseMatrix, t: &DenseMatrix) {
    for (x, y) in acc.entries_mut().iter_mut().zip(t.entries()) {
        *x += y;
    }
}

/// Turns an eigenvector of a positive map into a Hermitian PSD matrix by
/// removing the arbitrary phase and symmetrizing.
fn hermitian_psd(v: &[C64], chi: usize) -> DenseMatrix {
    let m = DenseMatrix::from_row_major(chi, chi, v.to_vec()).unwrap();
    let tr = m.trace();
    let phase = if tr.norm() > 0.0 { tr.conj() / tr.norm() } else { C64::new(1.0, 0.0) };
    DenseMatrix::from_fn(chi, chi, |i, j| 0.5 * (m[(i, j)] * phase + (m[(j, i)] * phase).conj()))
}

/// Sort λ descending and fix the diagonal phase gauge `Γ → P Γ P†`.
///
/// The global phase of `Γ` is chosen so the largest `|Γ^s_{00}|` is real
/// positive; then, column by column, the largest entry above the diagonal
/// (rows already fixed) is made real positive.
pub(crate) fn fix_gauge(mps: &mut InfiniteMps) {
    let chi = mps.chi;
    let d = mps.d;
    let mut perm: Vec<usize> = (0..chi).collect();
    perm.sort_by(|&i, &j| mps.lambda[j].total_cmp(&mps.lambda[i]).then(i.cmp(&j)));
    if perm.iter().enumerate().any(|(i, &p)| i != p) {
        let old = mps.clone();
        for s in 0..d {
            for a in 0..chi {
                for b in 0..chi {
                    mps.gamma[(s * chi + a) * chi + b] = old.gamma(s, perm[a], perm[b]);
                }
            }
        }
        mps.lambda = perm.iter().map(|&p| old.lambda[p]).collect();
    }

    let mut best = ZERO;
    for s in 0..d {
        let g = mps.gamma(s, 0, 0);
        if g.norm() > best.norm() {
            best = g;
        }
    }
    if best.norm() > 0.0 {
        let ph = best.conj() / best.norm();
        for z in &mut mps.gamma {
            *z *= ph;
        }
    }

    // θ_0 = 0; choose θ_b from the largest |Γ^s_{ab}| with a < b
    let mut theta = vec![0.0f64; chi];
    for b in 1..chi {
        let mut best = ZERO;
        let mut best_row = 0;
        for a in 0..b {
            for s in 0..d {
                let g = mps.gamma(s, a, b);
                if g.norm() > best.norm() * (1.0 + 1e-12) {
                    best = g;
                    best_row = a;
                }
            }
        }
        if best.norm() > 1e-300 {
            theta[b] = best.arg() + theta[best_row];
        }
    }
    for s in 0..d {
        for a in 0..chi {
            for b in 0..chi {
                let ph = C64::from_polar(1.0, theta[a] - theta[b]);
                mps.gamma[(s * chi + a) * chi + b] *= ph;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_one_random_is_product() {
        let m = random_imps(3, 2, 1).unwrap();
        assert_eq!(m.lambda(), &[1.0]);
        let norm: f64 = (0..2).map(|s| m.gamma(s, 0, 0).norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_imps(42, 2, 4).unwrap();
        let b = random_imps(42, 2, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_imps(43, 2, 4).unwrap());
    }

    #[test]
    fn seed7_residuals() {
        let m = random_imps(7, 2, 3).unwrap();
        let (r, l) = m.canonical_residuals();
        assert!(r < 1e-8 && l < 1e-8, "residuals {r} {l}");
        let norm: f64 = m.lambda().iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(m.lambda().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn canonical_input_is_fixed_point() {
        let m = random_imps(9, 3, 4).unwrap();
        let again = canonicalize(m.d(), m.gamma_raw(), m.lambda()).unwrap();
        for (x, y) in m.lambda().iter().zip(again.lambda()) {
            assert!((x - y).abs() < 1e-10);
        }
        // identical after gauge fixing up to roundoff
        let diff = m
            .gamma_raw()
            .iter()
            .zip(again.gamma_raw())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-8, "gamma moved by {diff}");
    }

    #[test]
    fn zero_tensor_is_degenerate() {
        let err = canonicalize(2, &[ZERO; 8], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateState(_)));
    }

    #[test]
    fn product_constructor() {
        let m = InfiniteMps::product(&[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert!(m.is_canonical(1e-12));
        let z = DenseMatrix::from_diag(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        assert!((m.expectation(&z).re - (0.36 - 0.64)).abs() < 1e-12);
    }
}
