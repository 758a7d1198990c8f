use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::DenseState;
use crate::error::{Error, Result};
use crate::geoent::SolverOptions;
use crate::numerics::{eigh, normalize, DenseMatrix, C64, ZERO};

/// Largest single-block dimension `d^L`.
const BLOCK_DIM_CAP: usize = 256;
/// Bloch-sphere grid spacing in radians.
pub const GRID_STEP: f64 = 0.01;

#[derive(Clone, Debug)]
pub struct BruteForceGe {
    pub e_total: f64,
    pub e_per_block: f64,
    pub best_overlap_sq: f64,
    pub per_block_states: Vec<Vec<C64>>,
    pub starts_used: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Overlap after each sweep of the winning start.
    pub trace: Vec<f64>,
    /// Exhaustive Bloch-grid optimum, computed for qubit blocks when there
    /// are at most three of them.
    pub grid_overlap_sq: Option<f64>,
}

struct Layout {
    blocks: usize,
    dim: usize,
}

/// `⟨⊗_{j≠k} φ_j | Ψ⟩` as a vector on block `k`.
fn contract_except(psi: &[C64], lay: &Layout, states: &[Vec<C64>], k: usize) -> Vec<C64> {
    let dd = lay.dim;
    let mut cur: Vec<C64> = psi.to_vec();
    // trailing blocks first, each time the last remaining one
    for j in (k + 1..lay.blocks).rev() {
        let phi = &states[j];
        cur = cur.chunks(dd).map(|c| c.iter().zip(phi).map(|(x, p)| p.conj() * x).sum()).collect();
    }
    // then leading blocks, each time the first remaining one
    for phi in &states[..k] {
        let rest = cur.len() / dd;
        let mut next = vec![ZERO; rest];
        for (m, p) in phi.iter().enumerate() {
            let pc = p.conj();
            for (o, x) in next.iter_mut().zip(&cur[m * rest..(m + 1) * rest]) {
                *o += pc * x;
            }
        }
        cur = next;
    }
    cur
}

fn reduced_top_vector(psi: &[C64], lay: &Layout, k: usize) -> Result<Vec<C64>> {
    let dd = lay.dim;
    let right = dd.pow((lay.blocks - 1 - k) as u32);
    let left = psi.len() / (dd * right);
    let mut rho = DenseMatrix::zeros(dd, dd);
    for l in 0..left {
        for m in 0..dd {
            for m2 in 0..dd {
                let mut acc = ZERO;
                for r in 0..right {
                    acc += psi[(l * dd + m) * right + r] * psi[(l * dd + m2) * right + r].conj();
                }
                rho.entries_mut()[m * dd + m2] += acc;
            }
        }
    }
    let (_, vecs) = eigh(&rho)?;
    Ok(vecs.column(0))
}

struct Outcome {
    value: f64,
    states: Vec<Vec<C64>>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn run_start(psi: &[C64], lay: &Layout, mut states: Vec<Vec<C64>>, opts: &SolverOptions) -> Result<Outcome> {
    let mut trace = Vec::new();
    let mut prev = 0.0;
    for it in 1..=opts.max_iter {
        let mut value = 0.0;
        for k in 0..lay.blocks {
            let mut v = contract_except(psi, lay, &states, k);
            let n = normalize(&mut v);
            if n < 1e-150 {
                return Err(Error::DegenerateDirection(n));
            }
            value = n * n;
            states[k] = v;
        }
        if value < prev * (1.0 - 1e-12) - 1e-300 {
            return Err(Error::NumericalBreakdown(format!("alternating overlap decreased from {prev} to {value}")));
        }
        trace.push(value);
        let gain = value - prev;
        prev = value;
        if it > 1 && gain <= opts.tol * value {
            return Ok(Outcome { value, states, iterations: it, converged: true, trace });
        }
    }
    Ok(Outcome { value: prev, states, iterations: opts.max_iter, converged: false, trace })
}

fn random_states(lay: &Layout, seed: u64, stream: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..lay.blocks)
        .map(|_| {
            let mut v: Vec<C64> =
                (0..lay.dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            normalize(&mut v);
            v
        })
        .collect()
}

/// Largest `|⟨φ₁ ⊗ … ⊗ φ_K|Ψ⟩|²` over product states of `K = N/L`
/// contiguous blocks, by alternating updates from several starts.
///
/// Start 0 uses the top eigenvector of each block's reduced density matrix;
/// the others are seeded Gaussian vectors. Results are reproducible
/// regardless of thread count.
pub fn brute_force_ge(state: &DenseState, l: usize, opts: &SolverOptions) -> Result<BruteForceGe> {
    if l == 0 || state.n % l != 0 {
        return Err(Error::InvalidInput(format!("block size {l} must divide {} sites", state.n)));
    }
    if opts.starts == 0 || opts.max_iter == 0 || !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("solver needs starts >= 1, max_iter >= 1, tol > 0".into()));
    }
    let dim = state.d.checked_pow(l as u32).filter(|&x| x <= BLOCK_DIM_CAP).ok_or(Error::TooLarge {
        dim: state.d.checked_pow(l as u32).unwrap_or(usize::MAX),
        cap: BLOCK_DIM_CAP,
    })?;
    let lay = Layout { blocks: state.n / l, dim };
    let psi = &state.amps;

    let outcomes: Vec<Result<Outcome>> = (0..opts.starts)
        .into_par_iter()
        .map(|i| {
            let init = if i == 0 {
                (0..lay.blocks).map(|k| reduced_top_vector(psi, &lay, k)).collect::<Result<Vec<_>>>()?
            } else {
                random_states(&lay, opts.seed, i as u64)
            };
            run_start(psi, &lay, init, opts)
        })
        .collect();

    let mut best: Option<Outcome> = None;
    for o in outcomes {
        match o {
            Ok(o) => {
                if best.as_ref().map_or(true, |b| o.value > b.value) {
                    best = Some(o);
                }
            }
            Err(Error::DegenerateDirection(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let best = best.ok_or(Error::DegenerateDirection(0.0))?;
    let overlap = best.value.min(1.0);
    let e_total = -overlap.ln();
    let grid_overlap_sq = (dim == 2 && lay.blocks <= 3).then(|| qubit_grid(psi, lay.blocks));
    Ok(BruteForceGe {
        e_total,
        e_per_block: e_total / lay.blocks as f64,
        best_overlap_sq: overlap,
        per_block_states: best.states,
        starts_used: opts.starts,
        iterations: best.iterations,
        converged: best.converged,
        trace: best.trace,
        grid_overlap_sq,
    })
}

/// `σ_max²` of a 2×2 matrix.
fn top_singular_sq(m: [C64; 4]) -> f64 {
    let f: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = (m[0] * m[3] - m[1] * m[2]).norm_sqr();
    0.5 * (f + (f * f - 4.0 * det).max(0.0).sqrt())
}

fn bloch(theta: f64, phi: f64) -> [C64; 2] {
    [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// Exhaustive optimum for one to three qubits. One qubit is trivial, two
/// reduce to the top singular value, three scan the first qubit over the
/// Bloch sphere and solve the remaining pair exactly.
fn qubit_grid(psi: &[C64], blocks: usize) -> f64 {
    match blocks {
        1 => psi.iter().map(|z| z.norm_sqr()).sum(),
        2 => top_singular_sq([psi[0], psi[1], psi[2], psi[3]]),
        _ => {
            let f = |theta: f64, phi: f64| {
                let v = bloch(theta, phi);
                let mut m = [ZERO; 4];
                for (i, mi) in m.iter_mut().enumerate() {
                    *mi = v[0].conj() * psi[i] + v[1].conj() * psi[4 + i];
                }
                top_singular_sq(m)
            };
            bloch_search(&f)
        }
    }
}

/// Maximizes `f(θ, φ)` over the sphere on a `GRID_STEP` lattice, then refines
/// around the best node with successively finer lattices.
pub(crate) fn bloch_search(f: &(impl Fn(f64, f64) -> f64 + Sync)) -> f64 {
    use std::f64::consts::PI;
    let nt = (PI / GRID_STEP).ceil() as usize;
    let np = (2.0 * PI / GRID_STEP).ceil() as usize;
    let (mut best, mut bt, mut bp) = (0..=nt)
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 * GRID_STEP).min(PI);
            let mut row = (f64::NEG_INFINITY, t, 0.0);
            for j in 0..np {
                let p = j as f64 * GRID_STEP;
                let v = f(t, p);
                if v > row.0 {
                    row = (v, t, p);
                }
            }
            row
        })
        .reduce(|| (f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let mut step = GRID_STEP;
    for _ in 0..6 {
        let center = (bt, bp);
        for i in -4i32..=4 {
            for j in -4i32..=4 {
                let t = (center.0 + i as f64 * step / 4.0).clamp(0.0, PI);
                let p = center.1 + j as f64 * step / 4.0;
                let v = f(t, p);
                if v > best {
                    (best, bt, bp) = (v, t, p);
                }
            }
        }
        step /= 4.0;
    }
    best
}
