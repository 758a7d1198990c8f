//! Geometric entanglement of infinite matrix product states.
//!
//! The crate computes the global geometric entanglement per block of `L`
//! sites for translationally invariant one-dimensional states, together with
//! the spectral quantities it is bounded by, and checks their scaling with
//! the correlation length and the block size on the transverse-field Ising
//! chain.

pub mod error;
pub mod geoent;
pub mod harness;
pub mod imps;
pub mod models;
pub mod numerics;
pub mod oracle;

pub use error::{Error, Result};
pub use geoent::{BlockState, GeoEntResult, SolverOptions, TransferMatrix, WeylBounds};
pub use harness::{FitMode, FitResult, SweepRecord};
pub use imps::{BlockSpectrum, BlockTensor, InfiniteMps};
pub use models::{ITEBDOptions, NNModel};
pub use numerics::{DenseMatrix, EigenSet, SvdResult, C64};
pub use oracle::{BruteForceGe, DenseState};
