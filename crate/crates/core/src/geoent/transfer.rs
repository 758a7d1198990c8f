use crate::error::{Error, Partial, Result};
use crate::imps::{block_tensor, InfiniteMps};
use crate::numerics::{dominant_eigs, dominant_eigs_dense, eig_dense, DenseMatrix, EigenSet, IterOptions, C64, ZERO};

/// Full spectra are computed densely up to this dimension; above it only the
/// leading part is extracted.
const FULL_SPECTRUM_DIM: usize = 256;
const PARTIAL_SPECTRUM_K: usize = 8;

/// `A(L)` with row index `(αα') = α·chi + α'` and column index `(ββ')`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub l: usize,
    pub chi: usize,
    pub mat: DenseMatrix,
}

impl TransferMatrix {
    #[inline]
    pub fn get(&self, a: usize, a2: usize, b: usize, b2: usize) -> C64 {
        self.mat[(a * self.chi + a2, b * self.chi + b2)]
    }

    /// `A(L)·A(L')` = `A(L + L')`.
    pub fn compose(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix { l: self.l + other.l, chi: self.chi, mat: self.mat.matmul(&other.mat) }
    }
}

/// `√Λ Γ^s √Λ` for each `s`.
pub(crate) fn weighted_sites(mps: &InfiniteMps) -> Vec<DenseMatrix> {
    let w: Vec<f64> = mps.lambda().iter().map(|x| x.sqrt()).collect();
    let chi = mps.chi();
    (0..mps.d())
        .map(|s| DenseMatrix::from_fn(chi, chi, |a, b| mps.gamma(s, a, b) * (w[a] * w[b])))
        .collect()
}

/// `A(1)` as a map on `chi × chi` matrices: `V ↦ Σ_s G^s V G^s†`.
pub(crate) fn transfer_map(sites: &[DenseMatrix]) -> impl Fn(&[C64], &mut [C64]) + '_ {
    let chi = sites[0].rows();
    let adj: Vec<DenseMatrix> = sites.iter().map(|g| g.adjoint()).collect();
    move |x: &[C64], y: &mut [C64]| {
        let v = DenseMatrix::from_row_major(chi, chi, x.to_vec()).expect("vector has chi² entries");
        y.fill(ZERO);
        for (g, ga) in sites.iter().zip(&adj) {
            let t = g.matmul(&v).matmul(ga);
            for (o, z) in y.iter_mut().zip(t.entries()) {
                *o += z;
            }
        }
    }
}

pub fn transfer_matrix(mps: &InfiniteMps) -> TransferMatrix {
    let chi = mps.chi();
    let g = weighted_sites(mps);
    let mat = DenseMatrix::from_fn(chi * chi, chi * chi, |p, q| {
        let (a, a2) = (p / chi, p % chi);
        let (b, b2) = (q / chi, q % chi);
        g.iter().map(|m| m[(a, b)] * m[(a2, b2)].conj()).sum()
    });
    TransferMatrix { l: 1, chi, mat }
}

/// `A(1)^L` by repeated squaring.
pub fn transfer_block(mps: &InfiniteMps, l: usize) -> Result<TransferMatrix> {
    if l == 0 {
        return Err(Error::InvalidInput("block size must be at least 1".into()));
    }
    let mut base = transfer_matrix(mps);
    let mut acc: Option<TransferMatrix> = None;
    let mut k = l;
    loop {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(a) => a.compose(&base),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = base.compose(&base);
    }
    Ok(acc.expect("l >= 1"))
}

/// `A(L)` from explicit block-state overlaps,
/// `√(λ_α λ_α' λ_β λ_β') ⟨τ_{α'β'}|τ_{αβ}⟩`. Independent of the squaring route.
pub fn transfer_block_contraction(mps: &InfiniteMps, l: usize) -> Result<TransferMatrix> {
    let t = block_tensor(mps, l)?;
    let chi = mps.chi();
    let w: Vec<f64> = mps.lambda().iter().map(|x| x.sqrt()).collect();
    let cols: Vec<Vec<C64>> = (0..chi * chi).map(|p| t.column(p / chi, p % chi)).collect();
    let mat = DenseMatrix::from_fn(chi * chi, chi * chi, |p, q| {
        let (a, a2) = (p / chi, p % chi);
        let (b, b2) = (q / chi, q % chi);
        let ov = crate::numerics::dot(&cols[a2 * chi + b2], &cols[a * chi + b]);
        ov * (w[a] * w[a2] * w[b] * w[b2])
    });
    Ok(TransferMatrix { l, chi, mat })
}

/// Spectrum of `A(L)`: complete up to dimension 256, the leading eight
/// eigenpairs beyond.
pub fn transfer_spectrum(a: &TransferMatrix) -> Result<EigenSet> {
    let dim = a.mat.rows();
    let set = if dim <= FULL_SPECTRUM_DIM {
        eig_dense(&a.mat)?
    } else {
        dominant_eigs_dense(&a.mat, PARTIAL_SPECTRUM_K.min(dim), &IterOptions::default())?
    };
    check_nu1(set)
}

/// Leading `k` eigenpairs of `A(1)` without materializing it.
pub fn transfer_spectrum_top(mps: &InfiniteMps, k: usize) -> Result<EigenSet> {
    let sites = weighted_sites(mps);
    let dim = mps.chi() * mps.chi();
    let k = k.min(dim);
    let set = match dominant_eigs(transfer_map(&sites), dim, k, &IterOptions::default()) {
        Ok(s) => s,
        Err(Error::IterationLimit { best: Partial::Eigen(s), .. }) => {
            log::warn!("transfer spectrum did not fully converge; using best estimate");
            *s
        }
        Err(e) => return Err(e),
    };
    check_nu1(set)
}

fn check_nu1(set: EigenSet) -> Result<EigenSet> {
    let nu1 = set.values[0];
    if (nu1 - C64::new(1.0, 0.0)).norm() > 1e-6 {
        return Err(Error::CanonicalViolation(nu1));
    }
    Ok(set)
}

/// `|ν₂(A(1))|`; zero for `chi = 1`.
pub fn nu2_abs(mps: &InfiniteMps) -> Result<f64> {
    if mps.chi() == 1 {
        return Ok(0.0);
    }
    let set = transfer_spectrum_top(mps, 2)?;
    Ok(set.values[1].norm())
}

/// `ξ = −1/ln|ν₂(A(1))|` in lattice units.
pub fn correlation_length(mps: &InfiniteMps) -> Result<f64> {
    xi_from_nu2(nu2_abs(mps)?)
}

pub(crate) fn xi_from_nu2(nu2: f64) -> Result<f64> {
    if nu2 >= 1.0 - 1e-8 {
        return Err(Error::CriticalDegeneracy(nu2));
    }
    if nu2 == 0.0 {
        return Ok(0.0);
    }
    Ok(-1.0 / nu2.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imps::random_imps;

    #[test]
    fn product_state_transfer_is_one() {
        let m = random_imps(1, 2, 1).unwrap();
        let a = transfer_matrix(&m);
        assert_eq!(a.mat.rows(), 1);
        assert!((a.mat[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(correlation_length(&m).unwrap(), 0.0);
    }

    #[test]
    fn conjugation_symmetry() {
        let m = random_imps(3, 2, 3).unwrap();
        let a = transfer_matrix(&m);
        let chi = 3;
        for a1 in 0..chi {
            for a2 in 0..chi {
                for b1 in 0..chi {
                    for b2 in 0..chi {
                        assert!((a.get(a1, a2, b1, b2) - a.get(a2, a1, b2, b1).conj()).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn squaring_matches_contraction() {
        let m = random_imps(4, 2, 2).unwrap();
        for l in 1..=5 {
            let sq = transfer_block(&m, l).unwrap();
            let ct = transfer_block_contraction(&m, l).unwrap();
            assert!(sq.mat.max_abs_diff(&ct.mat) < 1e-12, "L={l}");
        }
    }

    #[test]
    fn dominant_pair_of_canonical_state() {
        let m = random_imps(8, 2, 4).unwrap();
        let spec = transfer_spectrum(&transfer_matrix(&m)).unwrap();
        assert!((spec.values[0] - C64::new(1.0, 0.0)).norm() < 1e-8);
        assert!(spec.values[1].norm() < 1.0);
        let top = transfer_spectrum_top(&m, 2).unwrap();
        for i in 0..2 {
            assert!((top.values[i].norm() - spec.values[i].norm()).abs() < 1e-8);
        }
        // a(1) = λ_α δ_{αα'}
        let chi = 4;
        let want: Vec<C64> = (0..chi * chi)
            .map(|p| if p / chi == p % chi { C64::new(m.lambda()[p / chi], 0.0) } else { ZERO })
            .collect();
        let ov = crate::numerics::dot(&want, &spec.vectors[0]).norm();
        assert!(ov > 1.0 - 1e-8, "overlap {ov}");
    }

    #[test]
    fn xi_edge_cases() {
        assert!((xi_from_nu2((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(xi_from_nu2(1.0 - 1e-9), Err(Error::CriticalDegeneracy(_))));
    }
}
