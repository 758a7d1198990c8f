use super::brute::bloch_search;
use crate::error::{Error, Result};
use crate::imps::InfiniteMps;
use crate::numerics::C64;

const ANGLE_NODES: usize = 64;

/// Grid optimum of the one-site uniform product ansatz.
#[derive(Clone, Copy, Debug)]
pub struct GridOptimum {
    /// `max_φ w(B(φ))²`, `w` the numerical radius.
    pub overlap_sq: f64,
    pub e: f64,
}

/// Largest eigenvalue of `(e^{iθ}B + e^{−iθ}B†)/2`, i.e. the support
/// function of the field of values in direction `−θ`.
fn support(b: &[C64; 4], theta: f64) -> f64 {
    let ph = C64::from_polar(1.0, theta);
    let h11 = (ph * b[0]).re;
    let h22 = (ph * b[3]).re;
    let h12 = 0.5 * (ph * b[1] + (ph * b[2]).conj());
    0.5 * (h11 + h22) + (0.25 * (h11 - h22).powi(2) + h12.norm_sqr()).sqrt()
}

/// Numerical radius `max_{‖r‖=1} |r† B r|` of a row-major 2×2 matrix,
/// as the maximum over angles of the support function.
pub fn numerical_radius_2x2(b: &[C64; 4]) -> f64 {
    use std::f64::consts::TAU;
    let h = TAU / ANGLE_NODES as f64;
    let (mut bi, mut bv) = (0, f64::NEG_INFINITY);
    for i in 0..ANGLE_NODES {
        let v = support(b, i as f64 * h);
        if v > bv {
            (bi, bv) = (i, v);
        }
    }
    // golden section on the bracketing cell pair
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = ((bi as f64 - 1.0) * h, (bi as f64 + 1.0) * h);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (support(b, x1), support(b, x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + g * (hi - lo);
            f2 = support(b, x2);
        } else {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - g * (hi - lo);
            f1 = support(b, x1);
        }
    }
    bv.max(f1).max(f2).max(0.0)
}

/// Exhaustive Bloch-sphere search for `L = 1`, `d = 2`, `chi = 2`:
/// maximizes `w(√Λ M(φ) √Λ)²` with `M(φ)_{αβ} = Σ_s conj(φ_s) Γ^s_{αβ}`.
pub fn imps_grid_l1(mps: &InfiniteMps) -> Result<GridOptimum> {
    if mps.d() != 2 || mps.chi() != 2 {
        return Err(Error::InvalidInput(format!(
            "grid oracle needs d = 2 and chi = 2, got d = {} and chi = {}",
            mps.d(),
            mps.chi()
        )));
    }
    let w: Vec<f64> = mps.lambda().iter().map(|x| x.sqrt()).collect();
    let g = |s: usize, a: usize, b: usize| mps.gamma(s, a, b) * (w[a] * w[b]);
    let f = |theta: f64, phi: f64| {
        let v0 = C64::new((theta / 2.0).cos(), 0.0);
        let v1 = C64::from_polar((theta / 2.0).sin(), phi);
        let m = |a, b| v0.conj() * g(0, a, b) + v1.conj() * g(1, a, b);
        numerical_radius_2x2(&[m(0, 0), m(0, 1), m(1, 0), m(1, 1)]).powi(2)
    };
    let overlap_sq = bloch_search(&f);
    if !(overlap_sq > 0.0) {
        return Err(Error::NumericalBreakdown(format!("grid optimum {overlap_sq} is not positive")));
    }
    Ok(GridOptimum { overlap_sq, e: -overlap_sq.min(1.0).ln() })
}
