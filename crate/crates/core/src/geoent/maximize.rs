use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::transfer::{transfer_block, TransferMatrix};
use super::BlockState;
use crate::error::{Error, Result};
use crate::imps::{block_tensor, InfiniteMps};
use crate::numerics::{dot, eig_dense, eigh, normalize, DenseMatrix, C64, ZERO};

/// Inner phase-rotation sweeps per outer iteration.
const INNER_MAX: usize = 200;
/// Relative slack allowed when asserting the objective does not decrease.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub starts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { starts: 8, max_iter: 1000, tol: 1e-12, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct GeoEntResult {
    /// Nats per block.
    pub e: f64,
    pub d_max_abs: f64,
    pub r: Vec<C64>,
    /// `‖ψ(r)‖²` at the optimum.
    pub phi_norm_sq: f64,
    pub iterations: usize,
    pub converged: bool,
    pub starts_used: usize,
    /// `|r† B r|` at the optimum.
    pub numerical_radius: f64,
    /// Largest `|eigenvalue|` of `B`.
    pub spectral_radius: f64,
    /// Set when the two radii differ by more than 1e-8.
    pub radii_disagree: bool,
    /// Objective `‖ψ(r)‖²` after each outer iteration of the winning start.
    pub trace: Vec<f64>,
}

/// `ψ(r) = Σ_{αβ} conj(r_α)√λ_α r_β√λ_β τ_{αβ}`, normalized, with `‖ψ(r)‖²`.
pub fn optimal_block_state(mps: &InfiniteMps, l: usize, r: &[C64]) -> Result<(BlockState, f64)> {
    let chi = mps.chi();
    if r.len() != chi {
        return Err(Error::InvalidInput(format!("r has length {}, expected {chi}", r.len())));
    }
    let rn = crate::numerics::norm(r);
    if (rn - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("r has norm {rn}, expected 1")));
    }
    let t = block_tensor(mps, l)?;
    let w: Vec<f64> = mps.lambda().iter().map(|x| x.sqrt()).collect();
    let mut amps = vec![ZERO; t.dim()];
    for (s, out) in amps.iter_mut().enumerate() {
        let mut acc = ZERO;
        for a in 0..chi {
            let ca = r[a].conj() * w[a];
            for b in 0..chi {
                acc += ca * r[b] * w[b] * t.get(s, a, b);
            }
        }
        *out = acc;
    }
    let n = normalize(&mut amps);
    if n < 1e-14 {
        return Err(Error::DegenerateDirection(n));
    }
    Ok((BlockState { l, d: mps.d(), amps }, n * n))
}

/// `(r ⊗ conj r)† A (r ⊗ conj r)` = `‖ψ(r)‖²`.
pub fn direction_norm_sq(a: &TransferMatrix, r: &[C64]) -> f64 {
    let chi = a.chi;
    let w: Vec<C64> = (0..chi * chi).map(|p| r[p / chi] * r[p % chi].conj()).collect();
    dot(&w, &a.mat.matvec(&w)).re
}

/// `B(r)` for `φ = ψ(r)/‖ψ(r)‖`, scaled by `‖ψ(r)‖`:
/// `Σ_{α'β'} r_α' conj(r_β') A_{(αα'),(ββ')}`.
fn b_unscaled(a: &TransferMatrix, r: &[C64]) -> DenseMatrix {
    let chi = a.chi;
    DenseMatrix::from_fn(chi, chi, |al, be| {
        let mut acc = ZERO;
        for a2 in 0..chi {
            let row = a.mat.row(al * chi + a2);
            let ra = r[a2];
            for b2 in 0..chi {
                acc += ra * r[b2].conj() * row[be * chi + b2];
            }
        }
        acc
    })
}

/// Maximizes `|r† B r|` over unit `r` by phase rotation: with
/// `θ = arg(r†Br)`, `r` moves to the top eigenvector of the Hermitian part
/// of `e^{−iθ} B`.
fn phase_rotation(b: &DenseMatrix, r: &mut Vec<C64>, tol: f64) -> Result<f64> {
    let chi = b.rows();
    let mut val = dot(r, &b.matvec(r)).norm();
    for _ in 0..INNER_MAX {
        let z = dot(r, &b.matvec(r));
        let ph = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(1.0, 0.0) };
        let h = DenseMatrix::from_fn(chi, chi, |i, j| 0.5 * (b[(i, j)] * ph + (b[(j, i)] * ph).conj()));
        let (_, vecs) = eigh(&h)?;
        let mut cand = vecs.column(0);
        normalize(&mut cand);
        let cval = dot(&cand, &b.matvec(&cand)).norm();
        if cval <= val {
            break;
        }
        let gain = cval - val;
        *r = cand;
        val = cval;
        if gain <= tol * val {
            break;
        }
    }
    Ok(val)
}

struct StartOutcome {
    value: f64,
    r: Vec<C64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn run_start(a: &TransferMatrix, mut r: Vec<C64>, opts: &SolverOptions) -> Result<StartOutcome> {
    normalize(&mut r);
    let mut value = direction_norm_sq(a, &r);
    if !(value > 1e-28) {
        return Err(Error::DegenerateDirection(value.max(0.0).sqrt()));
    }
    let mut trace = vec![value];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let b = b_unscaled(a, &r);
        phase_rotation(&b, &mut r, opts.tol * 1e-2)?;
        let next = direction_norm_sq(a, &r);
        if next < value * (1.0 - MONOTONE_SLACK) {
            return Err(Error::NumericalBreakdown(format!(
                "objective decreased from {value} to {next} at iteration {iterations}"
            )));
        }
        let gain = next - value;
        value = next.max(value);
        trace.push(value);
        if gain <= opts.tol * value {
            converged = true;
            break;
        }
    }
    crate::numerics::fix_phase(&mut r);
    Ok(StartOutcome { value, r, iterations, converged, trace })
}

fn start_vector(chi: usize, index: usize, seed: u64) -> Vec<C64> {
    if index == 0 {
        let mut e1 = vec![ZERO; chi];
        e1[0] = C64::new(1.0, 0.0);
        return e1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..chi).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

/// Geometric entanglement per block of `L` sites for the uniform product
/// ansatz, by alternating ascent over `(φ, r)` from several starts.
pub fn geoent_finite(mps: &InfiniteMps, l: usize, opts: &SolverOptions) -> Result<GeoEntResult> {
    let a = transfer_block(mps, l)?;
    geoent_finite_from_transfer(&a, opts)
}

pub fn geoent_finite_from_transfer(a: &TransferMatrix, opts: &SolverOptions) -> Result<GeoEntResult> {
    if opts.starts == 0 || opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("solver needs starts >= 1, max_iter >= 1, tol > 0".into()));
    }
    let chi = a.chi;
    let outcomes: Vec<Result<StartOutcome>> = (0..opts.starts)
        .into_par_iter()
        .map(|i| run_start(a, start_vector(chi, i, opts.seed), opts))
        .collect();

    let mut best: Option<(usize, StartOutcome)> = None;
    let mut first_err = None;
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) => {
                // strict comparison keeps the lowest start index on ties
                if best.as_ref().map_or(true, |(_, b)| o.value > b.value) {
                    best = Some((i, o));
                }
            }
            Err(Error::DegenerateDirection(_)) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    let (_, best) = best.ok_or(Error::DegenerateDirection(0.0))?;

    let d_max_abs = best.value.sqrt().min(1.0);
    let b = b_unscaled(a, &best.r);
    let bscaled = {
        let mut m = b.clone();
        m.scale(C64::new(1.0 / best.value.sqrt(), 0.0));
        m
    };
    let numerical_radius = dot(&best.r, &bscaled.matvec(&best.r)).norm();
    let spectral_radius = eig_dense(&bscaled)?.values[0].norm();
    Ok(GeoEntResult {
        e: -(d_max_abs * d_max_abs).ln(),
        d_max_abs,
        r: best.r,
        phi_norm_sq: best.value,
        iterations: best.iterations,
        converged: best.converged,
        starts_used: opts.starts,
        numerical_radius,
        spectral_radius,
        radii_disagree: (spectral_radius - numerical_radius).abs() > 1e-8,
        trace: best.trace,
    })
}

/// Overlap matrix `M_{αβ} = ⟨φ|τ_{αβ}⟩`.
pub fn overlap_matrix(mps: &InfiniteMps, phi: &BlockState) -> Result<DenseMatrix> {
    let t = block_tensor(mps, phi.l)?;
    if phi.amps.len() != t.dim() {
        return Err(Error::InvalidInput(format!(
            "block state has {} amplitudes, expected {}",
            phi.amps.len(),
            t.dim()
        )));
    }
    let chi = mps.chi();
    Ok(DenseMatrix::from_fn(chi, chi, |a, b| {
        phi.amps.iter().enumerate().map(|(s, p)| p.conj() * t.get(s, a, b)).sum()
    }))
}
