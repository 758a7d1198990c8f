use serde::Serialize;

use crate::error::Result;
use crate::geoent::{
    geoent_finite, single_copy, transfer_block, transfer_block_contraction, transfer_matrix, transfer_spectrum,
    weyl_bounds_unchecked, SolverOptions,
};
use crate::imps::{random_imps, reduced_density_spectrum_dense, reduced_density_spectrum_transfer, InfiniteMps};
use crate::models::{energy_per_site, itebd_ground_state, tfim_exact, ITEBDOptions, NNModel};
use crate::numerics::{dot, C64, ZERO};
use crate::oracle::{brute_force_ge, ed_ground_state, imps_grid_l1, Boundary, DenseState};

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation or a short description.
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckOutcome { name: name.into(), passed, detail });
    }

    /// Records the worst of `values` against `limit`.
    fn worst(&mut self, name: &str, values: impl IntoIterator<Item = f64>, limit: f64) {
        let w = values.into_iter().fold(0.0, f64::max);
        self.push(name, w <= limit, format!("worst {w:.3e}, limit {limit:.0e}"));
    }
}

fn corpus(seed: u64) -> Result<Vec<InfiniteMps>> {
    let mut out = Vec::new();
    for i in 0..12u64 {
        let d = if i % 4 == 3 { 3 } else { 2 };
        let chi = 1 + (i as usize % 6);
        out.push(random_imps(seed.wrapping_mul(1000).wrapping_add(i), d, chi)?);
    }
    Ok(out)
}

/// Runs the invariant corpus on seeded random states, a TFIM ground state
/// and the brute-force oracles.
pub fn verify_corpus(seed: u64) -> Result<VerifyReport> {
    let mut rep = VerifyReport::default();
    let states = corpus(seed)?;
    let solver = SolverOptions { seed, ..SolverOptions::default() };

    rep.worst("canonical residuals", states.iter().map(|m| {
        let (r, l) = m.canonical_residuals();
        r.max(l)
    }), 1e-8);

    let mut comp = Vec::new();
    for m in states.iter().filter(|m| m.chi() <= 4) {
        let a2 = transfer_block(m, 2)?;
        let a4 = transfer_block_contraction(m, 4)?;
        comp.push(a4.mat.max_abs_diff(&a2.compose(&a2).mat));
    }
    rep.worst("A(4) = A(2)^2", comp, 1e-12);

    let mut nu1 = Vec::new();
    let mut vec_dev = Vec::new();
    for m in &states {
        let spec = transfer_spectrum(&transfer_matrix(m))?;
        nu1.push((spec.values[0] - C64::new(1.0, 0.0)).norm());
        let chi = m.chi();
        let want: Vec<C64> =
            (0..chi * chi).map(|p| if p / chi == p % chi { C64::new(m.lambda()[p / chi], 0.0) } else { ZERO }).collect();
        vec_dev.push(1.0 - dot(&want, &spec.vectors[0]).norm());
    }
    rep.worst("nu1 = 1", nu1, 1e-8);
    rep.worst("dominant eigenvector", vec_dev, 1e-8);

    let mut routes = Vec::new();
    for m in states.iter().filter(|m| m.chi() <= 4) {
        for l in 1..=3 {
            let a = reduced_density_spectrum_dense(m, l)?;
            let b = reduced_density_spectrum_transfer(m, l)?;
            let dev = if a.probs.len() == b.probs.len() {
                a.probs.iter().zip(&b.probs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
            } else {
                1.0
            };
            routes.push(dev);
        }
    }
    rep.worst("block spectrum routes", routes, 1e-10);

    let gs = itebd_ground_state(&NNModel::tfim(3.0), &ITEBDOptions::with_chi(16), seed)?;
    let (e0, _) = tfim_exact(3.0)?;
    let de = (energy_per_site(&gs, &NNModel::tfim(3.0))? - e0).abs();
    rep.push("TFIM h=3 energy", de <= 1e-6, format!("deviation {de:.3e}, limit 1e-6"));

    let mut weyl = Vec::new();
    let mut bound = Vec::new();
    for m in states.iter().chain(std::iter::once(&gs)) {
        for l in [1, 2, 4] {
            let (up, low) = weyl_bounds_unchecked(m, l)?.margins();
            weyl.push((-up).max(-low));
        }
        if m.chi() <= 4 || std::ptr::eq(m, &gs) {
            for l in [1, 2] {
                let e = geoent_finite(m, l, &solver)?.e;
                bound.push(e - single_copy(m, l)?);
            }
        }
    }
    rep.worst("Weyl sandwich", weyl, 1e-10);
    rep.worst("E <= E1", bound, 1e-8);

    let mut grid = Vec::new();
    for i in 0..3 {
        let m = random_imps(seed.wrapping_mul(1000).wrapping_add(500 + i), 2, 2)?;
        grid.push((imps_grid_l1(&m)?.e - geoent_finite(&m, 1, &solver)?.e).abs());
    }
    rep.worst("alternating vs Bloch grid", grid, 1e-4);

    let w = 1.0 / 3f64.sqrt();
    let mut amps = vec![ZERO; 8];
    for i in [1, 2, 4] {
        amps[i] = C64::new(w, 0.0);
    }
    let bf = brute_force_ge(&DenseState::new(3, 2, amps)?, 1, &solver)?;
    let dw = (bf.best_overlap_sq - 4.0 / 9.0).abs();
    rep.push("W state overlap", dw <= 1e-8, format!("deviation {dw:.3e}, limit 1e-8"));

    let (_, ering) = ed_ground_state(&NNModel::tfim(0.0), 4, Boundary::Periodic)?;
    let dr = (ering + 4.0).abs();
    rep.push("classical ring energy", dr <= 1e-10, format!("deviation {dr:.3e}, limit 1e-10"));

    Ok(rep)
}
