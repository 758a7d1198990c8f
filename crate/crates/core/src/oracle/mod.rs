//! Brute-force references: exact diagonalization of small chains and
//! direct maximization of the product-state overlap over blocks.

mod brute;
mod grid;

pub use brute::{brute_force_ge, BruteForceGe, GRID_STEP};
pub use grid::{imps_grid_l1, numerical_radius_2x2, GridOptimum};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Partial, Result};
use crate::models::NNModel;
use crate::numerics::{dot, eigh, fix_phase, norm, normalize, DenseMatrix, C64, ZERO};

/// Largest Hilbert space handed to exact diagonalization is `2^14 · d`.
pub const ED_CAP_BASE: usize = 1 << 14;

const LANCZOS_BASIS: usize = 120;
const LANCZOS_RESTARTS: usize = 60;
const LANCZOS_SEED: u64 = 0x5eed_1a2c;

/// A normalized state of `n` sites, site 0 the most significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    pub n: usize,
    pub d: usize,
    pub amps: Vec<C64>,
}

impl DenseState {
    pub fn new(n: usize, d: usize, amps: Vec<C64>) -> Result<Self> {
        if d < 2 || n == 0 {
            return Err(Error::InvalidInput("need n >= 1 sites with d >= 2".into()));
        }
        let dim = d.checked_pow(n as u32).ok_or(Error::TooLarge { dim: usize::MAX, cap: ED_CAP_BASE * d })?;
        if amps.len() != dim {
            return Err(Error::InvalidInput(format!("{} amplitudes for {n} sites of dimension {d}", amps.len())));
        }
        let nr = norm(&amps);
        if (nr - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("state has norm {nr}, expected 1")));
        }
        Ok(Self { n, d, amps })
    }

    /// `v^{⊗n}`, normalized.
    pub fn product(v: &[C64], n: usize) -> Result<Self> {
        let mut amps = vec![C64::new(1.0, 0.0)];
        for _ in 0..n {
            amps = amps.iter().flat_map(|a| v.iter().map(move |x| a * x)).collect();
        }
        if normalize(&mut amps) == 0.0 {
            return Err(Error::InvalidInput("zero site vector".into()));
        }
        Self::new(n, v.len(), amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Cyclic shift by one site: the amplitude of `s₀ s₁ … s_{n−1}` moves to
    /// `s_{n−1} s₀ … s_{n−2}`.
    pub fn translated(&self) -> Self {
        let d = self.d;
        let top = self.dim() / d;
        let mut amps = vec![ZERO; self.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let (head, last) = (idx / d, idx % d);
            amps[last * top + head] = *a;
        }
        Self { n: self.n, d, amps }
    }

    pub fn overlap(&self, other: &DenseState) -> C64 {
        dot(&self.amps, &other.amps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

fn bonds(n: usize, bc: Boundary) -> Vec<(usize, usize)> {
    let mut b: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if bc == Boundary::Periodic && n > 2 {
        b.push((n - 1, 0));
    }
    b
}

/// `H x` for the chain built from `model.h2` on every bond.
pub fn apply_hamiltonian(model: &NNModel, n: usize, bc: Boundary, x: &[C64]) -> Vec<C64> {
    let d = model.d;
    let dim = x.len();
    let mut out = vec![ZERO; dim];
    for (i, j) in bonds(n, bc) {
        let pi = d.pow((n - 1 - i) as u32);
        let pj = d.pow((n - 1 - j) as u32);
        for (idx, &xv) in x.iter().enumerate() {
            if xv == ZERO {
                continue;
            }
            let (si, sj) = ((idx / pi) % d, (idx / pj) % d);
            let base = idx - si * pi - sj * pj;
            let col = si * d + sj;
            for ti in 0..d {
                for tj in 0..d {
                    let h = model.h2[(ti * d + tj, col)];
                    if h != ZERO {
                        out[base + ti * pi + tj * pj] += h * xv;
                    }
                }
            }
        }
    }
    out
}

/// Lowest eigenpair of the `n`-site chain. The phase is fixed so that the
/// largest amplitude is real and positive.
pub fn ed_ground_state(model: &NNModel, n: usize, bc: Boundary) -> Result<(DenseState, f64)> {
    model.check_hermitian()?;
    let d = model.d;
    let cap = ED_CAP_BASE * d;
    if n < 2 {
        return Err(Error::InvalidInput("need at least two sites".into()));
    }
    let dim = d.checked_pow(n as u32).filter(|&x| x <= cap).ok_or(Error::TooLarge {
        dim: d.checked_pow(n as u32).unwrap_or(usize::MAX),
        cap,
    })?;
    let apply = |x: &[C64]| apply_hamiltonian(model, n, bc, x);

    let (energy, mut v) = if dim <= 256 {
        let h = DenseMatrix::from_fn(dim, dim, |i, j| {
            let mut e = vec![ZERO; dim];
            e[j] = C64::new(1.0, 0.0);
            apply(&e)[i]
        });
        let (vals, vecs) = eigh(&h)?;
        (vals[dim - 1], vecs.column(dim - 1))
    } else {
        lanczos_lowest(&apply, dim)?
    };
    fix_phase(&mut v);
    normalize(&mut v);
    Ok((DenseState { n, d, amps: v }, energy))
}

/// Restarted Lanczos with full reorthogonalization.
fn lanczos_lowest(apply: &impl Fn(&[C64]) -> Vec<C64>, dim: usize) -> Result<(f64, Vec<C64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
    let mut start: Vec<C64> =
        (0..dim).map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))).collect();
    normalize(&mut start);
    let m_max = LANCZOS_BASIS.min(dim);
    for _ in 0..LANCZOS_RESTARTS {
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let tail = loop {
            let k = basis.len() - 1;
            let mut w = apply(&basis[k]);
            let a = dot(&basis[k], &w).re;
            alpha.push(a);
            // two passes of Gram–Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let b = norm(&w);
            if basis.len() == m_max || b < 1e-13 {
                break b;
            }
            for wi in w.iter_mut() {
                *wi /= b;
            }
            beta.push(b);
            basis.push(w);
        };
        let m = alpha.len();
        let t = DenseMatrix::from_fn(m, m, |i, j| {
            if i == j {
                C64::new(alpha[i], 0.0)
            } else if i == j + 1 {
                C64::new(beta[j], 0.0)
            } else if j == i + 1 {
                C64::new(beta[i], 0.0)
            } else {
                ZERO
            }
        });
        let (vals, vecs) = eigh(&t)?;
        let theta = vals[m - 1];
        let y = vecs.column(m - 1);
        let mut ritz = vec![ZERO; dim];
        for (q, c) in basis.iter().zip(&y) {
            for (ri, qi) in ritz.iter_mut().zip(q) {
                *ri += c * qi;
            }
        }
        normalize(&mut ritz);
        let resid = tail * y[m - 1].norm();
        if resid <= 1e-11 * theta.abs().max(1.0) {
            return Ok((theta, ritz));
        }
        start = ritz;
    }
    Err(Error::IterationLimit {
        what: "Lanczos ground state",
        iterations: LANCZOS_RESTARTS,
        best: Partial::Amplitudes(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tfim_exact;

    #[test]
    fn classical_ring() {
        let (_, e) = ed_ground_state(&NNModel::tfim(0.0), 4, Boundary::Periodic).unwrap();
        assert!((e + 4.0).abs() < 1e-12);
    }

    #[test]
    fn paramagnet_is_translation_invariant() {
        let (s, _) = ed_ground_state(&NNModel::tfim(1.7), 10, Boundary::Periodic).unwrap();
        let ov = s.overlap(&s.translated());
        assert!((ov.norm() - 1.0).abs() < 1e-9, "{ov}");
    }

    #[test]
    fn critical_ring_energy_near_thermodynamic_limit() {
        let (_, e) = ed_ground_state(&NNModel::tfim(1.0), 12, Boundary::Periodic).unwrap();
        let (e0, _) = tfim_exact(1.0).unwrap();
        assert!(((e / 12.0) - e0).abs() < 0.02 * e0.abs());
    }

    #[test]
    fn lanczos_matches_dense() {
        // 2^8 = 256 goes through the dense path, 2^9 through Lanczos
        let m = NNModel::tfim(0.8);
        let (_, e8) = ed_ground_state(&m, 8, Boundary::Open).unwrap();
        let (s9, e9) = ed_ground_state(&m, 9, Boundary::Open).unwrap();
        let hx = apply_hamiltonian(&m, 9, Boundary::Open, &s9.amps);
        let rq = dot(&s9.amps, &hx).re;
        assert!((rq - e9).abs() < 1e-10);
        // one extra bond in an open chain lowers the energy by about e0
        assert!(e9 < e8);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(ed_ground_state(&NNModel::tfim(1.0), 16, Boundary::Open), Err(Error::TooLarge { .. })));
    }
}
