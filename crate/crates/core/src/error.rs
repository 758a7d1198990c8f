use thiserror::Error;

use crate::imps::InfiniteMps;
use crate::numerics::EigenSet;

/// Best-so-far state handed back when an iterative routine runs out of
/// iterations.
#[derive(Debug, Clone)]
pub enum Partial {
    Eigen(Box<EigenSet>),
    State(Box<InfiniteMps>),
    Amplitudes(Vec<num_complex::Complex64>),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} did not converge after {iterations} iterations")]
    IterationLimit {
        what: &'static str,
        iterations: usize,
        best: Partial,
    },

    #[error("degenerate state: dominant transfer eigenvalue {0:e} is numerically zero")]
    DegenerateState(f64),

    #[error("block of {sites} sites needs {coeffs} coefficients per bond pair, cap is {cap}")]
    BlockTooLarge { sites: usize, coeffs: usize, cap: usize },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("dominant transfer eigenvalue {0} deviates from 1")]
    CanonicalViolation(num_complex::Complex64),

    #[error("|nu_2| = {0} is within 1e-8 of 1; the state is critical or cat-like")]
    CriticalDegeneracy(f64),

    #[error("direction r gives a block state of norm {0:e}")]
    DegenerateDirection(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("dimension {dim} exceeds cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("need at least two distinct points for a fit, got {0}")]
    InsufficientPoints(usize),

    #[error("unsupported state file version {0}")]
    UnsupportedVersion(u64),

    #[error("malformed state file: {0}")]
    Format(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that stem from the numbers themselves rather than
    /// from bad arguments or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IterationLimit { .. }
                | Error::DegenerateState(_)
                | Error::NumericalBreakdown(_)
                | Error::CanonicalViolation(_)
                | Error::CriticalDegeneracy(_)
                | Error::DegenerateDirection(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
