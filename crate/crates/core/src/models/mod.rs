//! Nearest-neighbour spin chains, their iTEBD ground states, and exact
//! transverse-field Ising references.

mod itebd;

pub use itebd::{energy_per_site, itebd_ground_state, itebd_run, ITEBDOptions, ItebdOutcome};

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, C64, ZERO};

#[derive(Clone, Debug)]
pub struct NNModel {
    pub name: String,
    pub d: usize,
    /// Two-site term, row index `s₁·d + s₂`.
    pub h2: DenseMatrix,
    pub params: Vec<(String, f64)>,
}

fn pauli() -> [DenseMatrix; 4] {
    let r = |x: f64| C64::new(x, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        DenseMatrix::identity(2),
        DenseMatrix::from_row_major(2, 2, vec![ZERO, r(1.0), r(1.0), ZERO]).unwrap(),
        DenseMatrix::from_row_major(2, 2, vec![ZERO, -i, i, ZERO]).unwrap(),
        DenseMatrix::from_row_major(2, 2, vec![r(1.0), ZERO, ZERO, r(-1.0)]).unwrap(),
    ]
}

pub(crate) fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
        a[(i / b.rows(), j / b.cols())] * b[(i % b.rows(), j % b.cols())]
    })
}

fn combine(terms: &[(f64, &DenseMatrix)]) -> DenseMatrix {
    let n = terms[0].1.rows();
    DenseMatrix::from_fn(n, n, |i, j| terms.iter().map(|(c, m)| m[(i, j)] * *c).sum())
}

impl NNModel {
    /// `H = −Σ σˣσˣ − h Σ σᶻ`, the field split evenly over the two bonds
    /// touching each site.
    pub fn tfim(h: f64) -> Self {
        let [id, x, _, z] = pauli();
        let h2 = combine(&[(-1.0, &kron(&x, &x)), (-h / 2.0, &kron(&z, &id)), (-h / 2.0, &kron(&id, &z))]);
        Self { name: "tfim".into(), d: 2, h2, params: vec![("h".into(), h)] }
    }

    /// `H = −Σ (σˣσˣ + σʸσʸ) − h Σ σᶻ`; gapless for `|h| < 2`.
    pub fn xx(h: f64) -> Self {
        let [id, x, y, z] = pauli();
        let h2 = combine(&[
            (-1.0, &kron(&x, &x)),
            (-1.0, &kron(&y, &y)),
            (-h / 2.0, &kron(&z, &id)),
            (-h / 2.0, &kron(&id, &z)),
        ]);
        Self { name: "xx".into(), d: 2, h2, params: vec![("h".into(), h)] }
    }

    pub fn by_name(name: &str, h: f64) -> Result<Self> {
        match name {
            "tfim" => Ok(Self::tfim(h)),
            "xx" => Ok(Self::xx(h)),
            other => Err(Error::InvalidInput(format!("unknown model {other:?}; expected tfim or xx"))),
        }
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    /// Coupling at which the model is critical, where one is defined.
    pub fn critical_field(&self) -> Option<f64> {
        match self.name.as_str() {
            "tfim" => Some(1.0),
            "xx" => Some(0.0),
            _ => None,
        }
    }

    /// Product state invariant under the model's Z₂ symmetry, used as the
    /// iTEBD start when the symmetric ground state is wanted. For `tfim` this
    /// is the field-polarized state; `xx` has none that is not an eigenstate.
    pub fn symmetric_start(&self) -> Option<Vec<f64>> {
        match self.name.as_str() {
            "tfim" => Some(vec![1.0, 0.0]),
            _ => None,
        }
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let n = self.d * self.d;
        if self.h2.rows() != n || self.h2.cols() != n {
            return Err(Error::InvalidInput(format!("h2 must be {n}x{n}")));
        }
        let dev = self.h2.max_abs_diff(&self.h2.adjoint());
        if dev > 1e-12 {
            return Err(Error::InvalidInput(format!("h2 is not Hermitian (deviation {dev:e})")));
        }
        Ok(())
    }
}

/// Exact ground-state energy per site and correlation length of the
/// transverse-field Ising chain `H = −Σ σˣσˣ − h Σ σᶻ`.
///
/// `xi` is `+∞` at `h = 1` and `0` at `h = 0`.
pub fn tfim_exact(h: f64) -> Result<(f64, f64)> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("field must be finite and non-negative, got {h}")));
    }
    let f = |k: f64| (1.0 + h * h - 2.0 * h * k.cos()).max(0.0).sqrt();
    let e0 = -adaptive_simpson(&f, 0.0, std::f64::consts::PI, 1e-13) / std::f64::consts::PI;
    let xi = if h == 0.0 {
        0.0
    } else if h == 1.0 {
        f64::INFINITY
    } else {
        1.0 / h.ln().abs()
    };
    Ok((e0, xi))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}
