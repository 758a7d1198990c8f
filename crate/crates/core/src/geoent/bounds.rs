use super::transfer::nu2_abs;
use super::{overlap_matrix, BlockState};
use crate::error::{Error, Result};
use crate::imps::{reduced_density_spectrum, BlockSpectrum, InfiniteMps};
use crate::numerics::{DenseMatrix, C64};

/// `−2 ln λ₁`, valid when `A(1)` has a single eigenvalue of modulus one.
pub fn geoent_asymptotic(mps: &InfiniteMps) -> Result<f64> {
    let nu2 = nu2_abs(mps)?;
    if nu2 >= 1.0 - 1e-8 {
        return Err(Error::CriticalDegeneracy(nu2));
    }
    Ok(asymptotic_value(mps))
}

pub(crate) fn asymptotic_value(mps: &InfiniteMps) -> f64 {
    -2.0 * mps.lambda1().ln()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylBounds {
    /// `ν₁(ρ)^{1/4}`
    pub upper: f64,
    /// `(ν₂(ρ) + ν_min(ρ))^{1/4}`, or 0 for a rank-one spectrum.
    pub lower: f64,
    pub lambda1: f64,
}

impl WeylBounds {
    pub fn from_spectrum(spec: &BlockSpectrum, lambda1: f64) -> Self {
        let upper = spec.nu1().powf(0.25);
        let lower = if spec.probs.len() >= 2 { (spec.probs[1] + spec.nu_min()).powf(0.25) } else { 0.0 };
        Self { upper, lower, lambda1 }
    }

    /// `upper − λ₁` and `λ₁ − lower`; both non-negative when the sandwich holds.
    pub fn margins(&self) -> (f64, f64) {
        (self.upper - self.lambda1, self.lambda1 - self.lower)
    }

    pub fn holds(&self, tol: f64) -> bool {
        let (up, low) = self.margins();
        up >= -tol && low >= -tol
    }
}

/// Bounds without the sandwich assertion.
pub fn weyl_bounds_unchecked(mps: &InfiniteMps, l: usize) -> Result<WeylBounds> {
    let spec = reduced_density_spectrum(mps, l)?;
    Ok(WeylBounds::from_spectrum(&spec, mps.lambda1()))
}

/// Bounds on `λ₁` from the block spectrum, with the sandwich asserted to 1e-10.
pub fn weyl_bounds(mps: &InfiniteMps, l: usize) -> Result<WeylBounds> {
    let w = weyl_bounds_unchecked(mps, l)?;
    if !w.holds(1e-10) {
        return Err(Error::InvariantViolation(format!(
            "Weyl sandwich at L={l}: lower {} <= lambda1 {} <= upper {} fails",
            w.lower, w.lambda1, w.upper
        )));
    }
    Ok(w)
}

/// `E₁ = −ln ν₁(ρ_L)`.
pub fn single_copy(mps: &InfiniteMps, l: usize) -> Result<f64> {
    Ok(-reduced_density_spectrum(mps, l)?.nu1().ln())
}

/// `⟨φ^{⊗M}|ρ_{ML}|φ^{⊗M}⟩` for `M` consecutive blocks.
///
/// With `B = √Λ M(φ) √Λ` this is `Σ_{αβ} λ_α λ_β |(B^M)_{αβ}|²`, i.e. the
/// bond weights contracted with the `M − 2`-th power of `B ⊗ conj(B)`
/// between the boundary vectors.
pub fn fidelity_finite_m(mps: &InfiniteMps, phi: &BlockState, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one block".into()));
    }
    let ov = overlap_matrix(mps, phi)?;
    let chi = mps.chi();
    let lam = mps.lambda();
    let w: Vec<f64> = lam.iter().map(|x| x.sqrt()).collect();
    let b = DenseMatrix::from_fn(chi, chi, |a, c| ov[(a, c)] * (w[a] * w[c]));
    let bm = matrix_power(&b, m);
    let mut f = 0.0;
    for a in 0..chi {
        for c in 0..chi {
            f += lam[a] * lam[c] * bm[(a, c)].norm_sqr();
        }
    }
    if !(-1e-10..=1.0 + 1e-10).contains(&f) {
        return Err(Error::NumericalBreakdown(format!("fidelity {f} outside [0, 1]")));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// `⟨φ|ρ_L|φ⟩`.
pub fn block_fidelity(mps: &InfiniteMps, phi: &BlockState) -> Result<f64> {
    fidelity_finite_m(mps, phi, 1)
}

fn matrix_power(b: &DenseMatrix, mut k: usize) -> DenseMatrix {
    let mut base = b.clone();
    let mut acc = DenseMatrix::identity(b.rows());
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            acc = if first { base.clone() } else { acc.matmul(&base) };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = base.matmul(&base);
        }
    }
    acc
}

/// Uniform product state of `L` copies of a one-site vector.
pub fn product_block(v: &[C64], l: usize) -> BlockState {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for _ in 0..l {
        amps = amps.iter().flat_map(|a| v.iter().map(move |x| a * x)).collect();
    }
    let mut s = BlockState { l, d: v.len(), amps };
    crate::numerics::normalize(&mut s.amps);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imps::random_imps;

    #[test]
    fn product_limits() {
        let m = random_imps(1, 2, 1).unwrap();
        assert_eq!(geoent_asymptotic(&m).unwrap(), 0.0);
        assert!(single_copy(&m, 3).unwrap().abs() < 1e-12);
        let w = weyl_bounds(&m, 2).unwrap();
        assert!((w.upper - 1.0).abs() < 1e-12);
        assert_eq!(w.lower, 0.0);
        let v: Vec<C64> = (0..2).map(|s| m.gamma(s, 0, 0)).collect();
        let phi = product_block(&v, 2);
        for k in [1, 2, 5] {
            assert!((fidelity_finite_m(&m, &phi, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn power_matches_repeated_products() {
        let b = DenseMatrix::from_fn(3, 3, |i, j| C64::new(0.1 * i as f64 - 0.2, 0.05 * j as f64));
        let mut want = DenseMatrix::identity(3);
        for k in 1..7 {
            want = want.matmul(&b);
            assert!(matrix_power(&b, k).max_abs_diff(&want) < 1e-14);
        }
    }
}
