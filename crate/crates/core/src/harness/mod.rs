//! Experiment drivers: coupling sweeps off criticality, block-size scans at
//! the critical point, log-linear fits and report files.

mod report;
mod verify;

pub use report::{emit_report, parse_csv, write_csv, Report, ReportPaths, CSV_HEADER};
pub use verify::{verify_corpus, CheckOutcome, VerifyReport};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geoent::{
    asymptotic_value, geoent_finite_from_transfer, nu2_abs, transfer_block, xi_from_nu2, SolverOptions,
    TransferMatrix,
};
use crate::imps::{reduced_density_spectrum, reduced_density_spectrum_from_transfer, InfiniteMps};
use crate::models::{itebd_ground_state, ITEBDOptions, NNModel};

/// Tolerance of the `E ≤ E₁` check.
pub const BOUND_SLACK: f64 = 1e-8;
/// A block size counts as saturated once the local slope of `E₁` against
/// `ln L` falls below this fraction of the first local slope.
const SATURATION_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// `E_asym` against `ln ξ`; `c = 12 · slope`.
    OffCritical,
    /// `E₁` against `ln L`; `c = 6 · slope`.
    Critical,
}

impl FitMode {
    pub fn factor(self) -> f64 {
        match self {
            FitMode::OffCritical => 12.0,
            FitMode::Critical => 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub c_est: f64,
    pub r2: f64,
    pub n_points: usize,
    pub mode: FitMode,
}

/// One row of a sweep or scan. Fields that were not computed are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub h: f64,
    pub chi: usize,
    pub l: Option<usize>,
    pub xi: Option<f64>,
    pub lambda1: f64,
    pub e_asym: f64,
    pub e_finite: Option<f64>,
    pub e1: Option<f64>,
    pub nu2_abs: f64,
}

/// Ordinary least squares of `ys` against `ln xs`.
pub fn fit_loglinear(xs: &[f64], ys: &[f64], mode: FitMode) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if let Some(bad) = xs.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidInput(format!("log fit needs positive finite abscissae, got {bad}")));
    }
    if let Some(bad) = ys.iter().find(|y| !y.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite ordinate {bad}")));
    }
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::InsufficientPoints(distinct.len()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    Ok(FitResult { slope, intercept, c_est: mode.factor() * slope, r2, n_points: xs.len(), mode })
}

/// Sizes rayon's global pool from `GEOENT_NUM_THREADS` if set. Harmless
/// when the pool already exists.
pub fn configure_threads() {
    if let Some(n) = std::env::var("GEOENT_NUM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub chi: usize,
    pub seed: u64,
    /// Block size for `E_finite` and `E₁`; by default the smallest power of
    /// two at or above `10 ξ`.
    pub block: Option<usize>,
    pub itebd: ITEBDOptions,
    pub solver: SolverOptions,
}

impl SweepOptions {
    pub fn new(chi: usize, seed: u64) -> Self {
        Self { chi, seed, block: None, itebd: ITEBDOptions::with_chi(chi), solver: SolverOptions::default() }
    }

    fn itebd(&self) -> ITEBDOptions {
        ITEBDOptions { chi_max: self.chi, ..self.itebd.clone() }
    }
}

/// `E₁` at the block size of `a`, taking the dense route when it is smaller.
fn single_copy_with(mps: &InfiniteMps, a: &TransferMatrix) -> Result<f64> {
    let chi2 = mps.chi() * mps.chi();
    let dense_ok = mps.d().checked_pow(a.l as u32).is_some_and(|n| n <= chi2);
    let spec = if dense_ok { reduced_density_spectrum(mps, a.l)? } else { reduced_density_spectrum_from_transfer(mps, a)? };
    Ok(-spec.nu1().ln())
}

fn offcritical_point(model: &str, h: f64, opts: &SweepOptions, seed: u64) -> Result<SweepRecord> {
    let m = NNModel::by_name(model, h)?;
    let mps = itebd_ground_state(&m, &opts.itebd(), seed)?;
    let nu2 = nu2_abs(&mps)?;
    let xi = xi_from_nu2(nu2)?;
    let l = opts.block.unwrap_or_else(|| ((10.0 * xi).ceil().max(1.0) as usize).next_power_of_two());
    let a = transfer_block(&mps, l)?;
    let e_finite = geoent_finite_from_transfer(&a, &opts.solver)?.e;
    let e1 = single_copy_with(&mps, &a)?;
    info!("h={h}: chi={} xi={xi:.4} L={l} E_finite={e_finite:.8} E1={e1:.8}", mps.chi());
    Ok(SweepRecord {
        h,
        chi: mps.chi(),
        l: Some(l),
        xi: Some(xi),
        lambda1: mps.lambda1(),
        e_asym: asymptotic_value(&mps),
        e_finite: Some(e_finite),
        e1: Some(e1),
        nu2_abs: nu2,
    })
}

/// Ground states across `h_list` and the fit of `E_asym` against `ln ξ`.
///
/// Points run in parallel with seed `opts.seed + index`; records keep the
/// input order. Points that turn out critical are skipped with a warning.
pub fn sweep_offcritical(model: &str, h_list: &[f64], opts: &SweepOptions) -> Result<(Vec<SweepRecord>, FitResult)> {
    opts.itebd().validate()?;
    let results: Vec<Result<SweepRecord>> = h_list
        .par_iter()
        .enumerate()
        .map(|(i, &h)| offcritical_point(model, h, opts, opts.seed.wrapping_add(i as u64)))
        .collect();
    let mut records = Vec::with_capacity(h_list.len());
    for (h, r) in h_list.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(Error::CriticalDegeneracy(nu2)) => warn!("skipping h={h}: |nu_2| = {nu2} is critical"),
            Err(e) => return Err(e),
        }
    }
    let xs: Vec<f64> = records.iter().filter_map(|r| r.xi).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.e_asym).collect();
    let fit = fit_loglinear(&xs, &ys, FitMode::OffCritical)?;
    Ok((records, fit))
}

#[derive(Clone, Debug)]
pub struct CriticalScan {
    pub records: Vec<SweepRecord>,
    /// `None` when fewer than two unsaturated block sizes remain.
    pub fit: Option<FitResult>,
    /// Block sizes with `E_finite > E₁ + 1e-8`.
    pub violations: usize,
    pub saturated: Vec<usize>,
    /// Effective correlation length of the finite-`chi` state, if finite.
    pub xi_eff: Option<f64>,
}

/// Block sizes flagged as saturated: beyond `ξ_eff`, or after the local
/// slope of `E₁` against `ln L` has dropped below a tenth of the first one.
pub fn saturated_sizes(ls: &[usize], e1: &[f64], xi_eff: Option<f64>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut flat = false;
    let first = if ls.len() >= 2 { Some(local_slope(ls, e1, 0)) } else { None };
    for i in 0..ls.len() {
        if i >= 1 {
            if let Some(s0) = first {
                if local_slope(ls, e1, i - 1) < SATURATION_FRACTION * s0 {
                    flat = true;
                }
            }
        }
        let beyond = xi_eff.is_some_and(|x| ls[i] as f64 > x);
        if flat || beyond {
            out.push(ls[i]);
        }
    }
    out
}

fn local_slope(ls: &[usize], e1: &[f64], i: usize) -> f64 {
    (e1[i + 1] - e1[i]) / ((ls[i + 1] as f64).ln() - (ls[i] as f64).ln())
}

/// Block-size scan at the model's critical coupling: `E₁(L)`, `E(L)`, the
/// count of bound violations, and the fit of `E₁` against `ln L` over the
/// unsaturated sizes.
/// iTEBD starts from the model's symmetric product state unless one is set.
pub fn critical_scan(model: &str, l_list: &[usize], opts: &SweepOptions) -> Result<CriticalScan> {
    let probe = NNModel::by_name(model, 0.0)?;
    let hc = probe
        .critical_field()
        .ok_or_else(|| Error::InvalidInput(format!("model {model} has no known critical coupling")))?;
    let m = NNModel::by_name(model, hc)?;
    // a random start lets finite χ pick a magnetized state, which suppresses E₁
    let mut it = opts.itebd();
    if it.initial.is_none() {
        it.initial = m.symmetric_start();
    }
    let mps = itebd_ground_state(&m, &it, opts.seed)?;
    critical_scan_state(&mps, hc, l_list, &opts.solver)
}

/// [`critical_scan`] on a given state.
pub fn critical_scan_state(mps: &InfiniteMps, h: f64, l_list: &[usize], solver: &SolverOptions) -> Result<CriticalScan> {
    let mut ls: Vec<usize> = l_list.to_vec();
    ls.sort_unstable();
    ls.dedup();
    if ls.is_empty() || ls[0] == 0 {
        return Err(Error::InvalidInput("block sizes must be positive".into()));
    }
    let nu2 = nu2_abs(mps)?;
    let xi_eff = xi_from_nu2(nu2).ok();
    let a1 = transfer_block(mps, 1)?;
    let mut records = Vec::with_capacity(ls.len());
    let mut violations = 0;
    let mut cur: Option<TransferMatrix> = None;
    for &l in &ls {
        // A(L) = A(L_prev) · A(L − L_prev), the step by repeated squaring
        let a = match &cur {
            None => transfer_block(mps, l)?,
            Some(prev) => prev.compose(&power(&a1, l - prev.l)),
        };
        let e1 = single_copy_with(mps, &a)?;
        let e = geoent_finite_from_transfer(&a, solver)?.e;
        if e > e1 + BOUND_SLACK {
            warn!("L={l}: E = {e} exceeds E1 = {e1}");
            violations += 1;
        }
        info!("L={l}: E={e:.10} E1={e1:.10}");
        records.push(SweepRecord {
            h,
            chi: mps.chi(),
            l: Some(l),
            xi: xi_eff,
            lambda1: mps.lambda1(),
            e_asym: asymptotic_value(mps),
            e_finite: Some(e),
            e1: Some(e1),
            nu2_abs: nu2,
        });
        cur = Some(a);
    }
    let e1s: Vec<f64> = records.iter().map(|r| r.e1.unwrap_or(f64::NAN)).collect();
    let saturated = saturated_sizes(&ls, &e1s, xi_eff);
    let (xs, ys): (Vec<f64>, Vec<f64>) = ls
        .iter()
        .zip(&e1s)
        .filter(|(l, _)| !saturated.contains(l))
        .map(|(&l, &e)| (l as f64, e))
        .unzip();
    let fit = match fit_loglinear(&xs, &ys, FitMode::Critical) {
        Ok(f) => Some(f),
        Err(Error::InsufficientPoints(n)) => {
            warn!("fit refused: {n} unsaturated block sizes");
            None
        }
        Err(e) => return Err(e),
    };
    Ok(CriticalScan { records, fit, violations, saturated, xi_eff })
}

fn power(a: &TransferMatrix, k: usize) -> TransferMatrix {
    let mut base = a.clone();
    let mut acc: Option<TransferMatrix> = None;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = Some(match acc {
                None => base.clone(),
                Some(x) => x.compose(&base),
            });
        }
        k >>= 1;
        if k > 0 {
            base = base.compose(&base);
        }
    }
    acc.expect("power of at least one")
}

/// Correlation length, `λ₁`, `E_asym` and `E₁(L)` of one state.
#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub chi: usize,
    pub xi: Option<f64>,
    pub nu2_abs: f64,
    pub lambda1: f64,
    pub e_asym: f64,
    pub e1: Vec<(usize, f64)>,
}

pub fn analyze(mps: &InfiniteMps, ls: &[usize]) -> Result<Analysis> {
    let nu2 = nu2_abs(mps)?;
    let e1 = ls
        .iter()
        .map(|&l| Ok((l, -reduced_density_spectrum(mps, l)?.nu1().ln())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis {
        chi: mps.chi(),
        xi: xi_from_nu2(nu2).ok(),
        nu2_abs: nu2,
        lambda1: mps.lambda1(),
        e_asym: asymptotic_value(mps),
        e1,
    })
}
