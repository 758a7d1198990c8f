use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use geoent_core::geoent::{geoent_finite, SolverOptions};
use geoent_core::harness::{
    analyze, configure_threads, critical_scan, emit_report, sweep_offcritical, verify_corpus, FitMode, Report,
    SweepOptions,
};
use geoent_core::imps::{read_state, write_state};
use geoent_core::models::{energy_per_site, itebd_ground_state, ITEBDOptions, NNModel};
use geoent_core::oracle::{brute_force_ge, ed_ground_state, Boundary};
use geoent_core::Error;

/// Geometric entanglement per block for translationally invariant iMPS.
#[derive(Parser, Debug)]
#[command(name = "geoent", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Ground state by iTEBD, saved as JSON.
    Gs {
        #[arg(long, default_value = "tfim")]
        model: String,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 32)]
        chi: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Correlation length, Schmidt data and single-copy entanglement of a saved state.
    Analyze {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "L", value_delimiter = ',', default_value = "1,2,4,8")]
        l: Vec<usize>,
    },
    /// Geometric entanglement per block of a saved state.
    Geoent {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Off-critical sweep over evenly spaced fields with the fit against ln ξ.
    Sweep {
        #[arg(long, default_value = "tfim")]
        model: String,
        #[arg(long, default_value_t = 1.05)]
        h_min: f64,
        #[arg(long, default_value_t = 1.25)]
        h_max: f64,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 32)]
        chi: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Block-size scan at the critical coupling.
    Critical {
        #[arg(long, default_value = "tfim")]
        model: String,
        #[arg(long, default_value_t = 64)]
        chi: usize,
        #[arg(long = "L-list", value_delimiter = ',', default_value = "4,8,16,32")]
        l_list: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Invariant corpus; exits 3 if any check fails.
    Verify {
        #[arg(long, default_value_t = 0)]
        corpus_seed: u64,
    },
    /// Exact diagonalization of a TFIM ring against the iMPS value.
    OracleCheck {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 16)]
        chi: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Core(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        return 2;
    }
    match e {
        Error::InvariantViolation(_) | Error::Format(_) | Error::UnsupportedVersion(_) => 3,
        _ => 1,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".into(), |x| format!("{x:.10}"))
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Gs { model, h, chi, seed, out } => {
            let m = NNModel::by_name(&model, h)?;
            let mps = itebd_ground_state(&m, &ITEBDOptions::with_chi(chi), seed)?;
            write_state(&mps, &out)?;
            println!("chi = {}", mps.chi());
            println!("energy_per_site = {:.12}", energy_per_site(&mps, &m)?);
            println!("lambda1 = {:.12}", mps.lambda1());
        }
        Cmd::Analyze { state, l } => {
            let a = analyze(&read_state(&state)?, &l)?;
            println!("chi = {}", a.chi);
            println!("xi = {}", opt(a.xi));
            println!("nu2_abs = {:.12}", a.nu2_abs);
            println!("lambda1 = {:.12}", a.lambda1);
            println!("E_asym = {:.12}", a.e_asym);
            for (l, e) in a.e1 {
                println!("E1(L={l}) = {e:.12}");
            }
        }
        Cmd::Geoent { state, l, starts, seed } => {
            let mps = read_state(&state)?;
            let r = geoent_finite(&mps, l, &SolverOptions { starts, seed, ..SolverOptions::default() })?;
            println!("L = {l}");
            println!("E = {:.12}", r.e);
            println!("converged = {}", r.converged);
        }
        Cmd::Sweep { model, h_min, h_max, points, chi, seed, out_dir } => {
            let hs = linspace(h_min, h_max, points);
            let (records, fit) = sweep_offcritical(&model, &hs, &SweepOptions::new(chi, seed))?;
            let report = Report { records: &records, fit: Some(&fit), mode: FitMode::OffCritical, violations: 0 };
            let paths = emit_report(&report, &out_dir)?;
            info!("wrote {}", paths.csv.display());
            println!("c_est = {:.6}", fit.c_est);
            println!("r2 = {:.6}", fit.r2);
            println!("n_points = {}", fit.n_points);
        }
        Cmd::Critical { model, chi, l_list, seed, out_dir } => {
            let scan = critical_scan(&model, &l_list, &SweepOptions::new(chi, seed))?;
            let report =
                Report { records: &scan.records, fit: scan.fit.as_ref(), mode: FitMode::Critical, violations: scan.violations };
            emit_report(&report, &out_dir)?;
            println!("xi_eff = {}", opt(scan.xi_eff));
            match &scan.fit {
                Some(f) => println!("c_est = {:.6}\nr2 = {:.6}\nn_points = {}", f.c_est, f.r2, f.n_points),
                None => println!("c_est = none (fewer than two unsaturated sizes)"),
            }
            println!("saturated = {:?}", scan.saturated);
            println!("violations = {}", scan.violations);
            if scan.violations > 0 {
                return Err(Failure::Check(format!("{} block sizes with E > E1", scan.violations)));
            }
        }
        Cmd::Verify { corpus_seed } => {
            let rep = verify_corpus(corpus_seed)?;
            for c in &rep.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            if !rep.all_passed() {
                let n = rep.checks.iter().filter(|c| !c.passed).count();
                return Err(Failure::Check(format!("{n} checks failed")));
            }
        }
        Cmd::OracleCheck { n, l, h, chi, seed } => {
            let m = NNModel::tfim(h);
            let (ring, _) = ed_ground_state(&m, n, Boundary::Periodic)?;
            let solver = SolverOptions { seed, ..SolverOptions::default() };
            let exact = brute_force_ge(&ring, l, &solver)?;
            let mps = itebd_ground_state(&m, &ITEBDOptions::with_chi(chi), seed)?;
            let e = geoent_finite(&mps, l, &solver)?.e;
            println!("E_ring_per_block = {:.10}", exact.e_per_block);
            println!("E_imps = {e:.10}");
            println!("rel_diff = {:.3e}", (exact.e_per_block - e).abs() / e.abs().max(f64::MIN_POSITIVE));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    configure_threads();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
