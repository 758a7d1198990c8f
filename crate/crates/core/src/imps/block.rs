use super::InfiniteMps;
use crate::error::{Error, Result};
use crate::geoent::{transfer_block, TransferMatrix};
use crate::numerics::{hermitian_eigenvalues, DenseMatrix, C64, DENSE_CAP};

/// Default cap on `d^L`, the number of coefficients per bond pair.
pub const BLOCK_CAP: usize = 1 << 20;

/// Eigenvalues below this (after trace normalization) are dropped.
const PROB_FLOOR: f64 = 1e-14;

/// `τ^{s⃗}_{αβ} = (Γ^{s₁} Λ Γ^{s₂} Λ … Λ Γ^{s_L})_{αβ}` for one block.
#[derive(Clone, Debug)]
pub struct BlockTensor {
    pub l: usize,
    pub d: usize,
    pub chi: usize,
    /// `coeffs[(s⃗ * chi + α) * chi + β]` with `s₁` the most significant digit.
    pub coeffs: Vec<C64>,
}

impl BlockTensor {
    pub fn dim(&self) -> usize {
        self.coeffs.len() / (self.chi * self.chi)
    }

    #[inline]
    pub fn get(&self, s: usize, a: usize, b: usize) -> C64 {
        self.coeffs[(s * self.chi + a) * self.chi + b]
    }

    /// The vector `τ_{αβ}` over block configurations.
    pub fn column(&self, a: usize, b: usize) -> Vec<C64> {
        (0..self.dim()).map(|s| self.get(s, a, b)).collect()
    }
}

/// Eigenvalues of the block reduced density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpectrum {
    pub l: usize,
    /// Descending, summing to one; values below 1e-14 are dropped.
    pub probs: Vec<f64>,
    pub raw_trace: f64,
}

impl BlockSpectrum {
    pub fn nu1(&self) -> f64 {
        self.probs[0]
    }

    /// Smallest retained eigenvalue.
    pub fn nu_min(&self) -> f64 {
        *self.probs.last().expect("spectrum is never empty")
    }
}

pub fn block_tensor(mps: &InfiniteMps, l: usize) -> Result<BlockTensor> {
    block_tensor_capped(mps, l, BLOCK_CAP)
}

pub fn block_tensor_capped(mps: &InfiniteMps, l: usize, cap: usize) -> Result<BlockTensor> {
    if l == 0 {
        return Err(Error::InvalidInput("block size must be at least 1".into()));
    }
    let d = mps.d();
    let chi = mps.chi();
    let dim = checked_pow(d, l).filter(|&n| n <= cap).ok_or(Error::BlockTooLarge {
        sites: l,
        coeffs: checked_pow(d, l).unwrap_or(usize::MAX),
        cap,
    })?;
    let lam = mps.lambda();
    let gammas: Vec<DenseMatrix> = (0..d).map(|s| mps.gamma_matrix(s)).collect();
    // Λ Γ^s, applied on the right when a site is appended
    let lg: Vec<DenseMatrix> = gammas
        .iter()
        .map(|g| DenseMatrix::from_fn(chi, chi, |a, b| g[(a, b)] * lam[a]))
        .collect();

    let mut coeffs: Vec<C64> = mps.gamma_raw().to_vec();
    let mut cur = d;
    let n = chi * chi;
    for _ in 1..l {
        let mut next = Vec::with_capacity(cur * d * n);
        for prefix in 0..cur {
            let t = DenseMatrix::from_row_major(chi, chi, coeffs[prefix * n..(prefix + 1) * n].to_vec())?;
            for m in &lg {
                next.extend_from_slice(t.matmul(m).entries());
            }
        }
        coeffs = next;
        cur *= d;
    }
    debug_assert_eq!(cur, dim);
    Ok(BlockTensor { l, d, chi, coeffs })
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Spectrum of the `L`-site block density matrix.
///
/// Both routes below are exact in canonical form. The dense route is used
/// while `d^L ≤ chi²` (its matrix is the smaller one), the transfer route
/// otherwise.
pub fn reduced_density_spectrum(mps: &InfiniteMps, l: usize) -> Result<BlockSpectrum> {
    let chi2 = mps.chi() * mps.chi();
    match checked_pow(mps.d(), l) {
        Some(n) if n <= chi2 && l >= 1 => reduced_density_spectrum_dense(mps, l),
        _ => reduced_density_spectrum_transfer(mps, l),
    }
}

/// Transfer route: diagonalizes
/// `R_{(αβ),(α'β')} = √(λ_α λ_β λ_α' λ_β') A(L)_{(αα'),(ββ')}`.
pub fn reduced_density_spectrum_transfer(mps: &InfiniteMps, l: usize) -> Result<BlockSpectrum> {
    if l == 0 {
        return Err(Error::InvalidInput("block size must be at least 1".into()));
    }
    let chi2 = mps.chi() * mps.chi();
    if chi2 > DENSE_CAP {
        return Err(Error::TooLarge { dim: chi2, cap: DENSE_CAP });
    }
    let a = transfer_block(mps, l)?;
    reduced_density_spectrum_from_transfer(mps, &a)
}

/// Transfer route with `A(L)` already at hand.
pub fn reduced_density_spectrum_from_transfer(mps: &InfiniteMps, a: &TransferMatrix) -> Result<BlockSpectrum> {
    let chi = mps.chi();
    let lam = mps.lambda();
    let w: Vec<f64> = lam.iter().map(|x| x.sqrt()).collect();
    let m = &a.mat;
    let r = DenseMatrix::from_fn(chi * chi, chi * chi, |p, q| {
        let (al, be) = (p / chi, p % chi);
        let (al2, be2) = (q / chi, q % chi);
        let x = m[(al * chi + al2, be * chi + be2)];
        let y = m[(al2 * chi + al, be2 * chi + be)].conj();
        0.5 * (x + y) * (w[al] * w[be] * w[al2] * w[be2])
    });
    finish(a.l, hermitian_eigenvalues(&r)?)
}

/// Dense route: materializes the block states and diagonalizes the smaller
/// of `X X†` and `X† X`, `X_{s⃗,(αβ)} = λ_α λ_β τ^{s⃗}_{αβ}`.
pub fn reduced_density_spectrum_dense(mps: &InfiniteMps, l: usize) -> Result<BlockSpectrum> {
    let t = block_tensor(mps, l)?;
    let chi = mps.chi();
    let lam = mps.lambda();
    let dim = t.dim();
    let x = DenseMatrix::from_fn(dim, chi * chi, |s, p| t.get(s, p / chi, p % chi) * (lam[p / chi] * lam[p % chi]));
    let g = if dim <= chi * chi { x.matmul(&x.adjoint()) } else { x.adjoint().matmul(&x) };
    if g.rows() > DENSE_CAP {
        return Err(Error::TooLarge { dim: g.rows(), cap: DENSE_CAP });
    }
    let g = DenseMatrix::from_fn(g.rows(), g.cols(), |i, j| 0.5 * (g[(i, j)] + g[(j, i)].conj()));
    finish(l, hermitian_eigenvalues(&g)?)
}

fn finish(l: usize, eig: Vec<f64>) -> Result<BlockSpectrum> {
    let raw_trace: f64 = eig.iter().sum();
    if !(raw_trace > 0.0) || !raw_trace.is_finite() {
        return Err(Error::NumericalBreakdown(format!("block density matrix has trace {raw_trace}")));
    }
    let mut probs = Vec::with_capacity(eig.len());
    for &v in &eig {
        let p = v / raw_trace;
        if p < -1e-10 {
            return Err(Error::NumericalBreakdown(format!("block density matrix eigenvalue {p:e} < 0")));
        }
        if p >= PROB_FLOOR {
            probs.push(p);
        }
    }
    if probs.is_empty() {
        return Err(Error::NumericalBreakdown("block density matrix has no retained eigenvalue".into()));
    }
    Ok(BlockSpectrum { l, probs, raw_trace })
}

/// `−Σ λ² ln λ²` across one bond.
pub fn schmidt_entropy(mps: &InfiniteMps) -> f64 {
    mps.lambda()
        .iter()
        .map(|x| x * x)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}
