//! Geometric entanglement per block of a translationally invariant state.
//!
//! Everything here is phrased through the `chi² × chi²` transfer matrix
//! `A(L)` with entries `√(λ_α λ_α' λ_β λ_β') ⟨τ_{α'β'}|τ_{αβ}⟩`: the norm of
//! the best block state for a bond direction `r` is the quadratic form of
//! `A(L)` at `r ⊗ conj(r)`.

mod bounds;
mod maximize;
mod transfer;

pub use bounds::{
    block_fidelity, fidelity_finite_m, geoent_asymptotic, product_block, single_copy, weyl_bounds,
    weyl_bounds_unchecked, WeylBounds,
};
pub use maximize::{
    direction_norm_sq, geoent_finite, geoent_finite_from_transfer, optimal_block_state, overlap_matrix,
    GeoEntResult, SolverOptions,
};
pub use transfer::{
    correlation_length, nu2_abs, transfer_block, transfer_block_contraction, transfer_matrix,
    transfer_spectrum, transfer_spectrum_top, TransferMatrix,
};

pub(crate) use bounds::asymptotic_value;
pub(crate) use transfer::xi_from_nu2;

use crate::numerics::C64;

/// A normalized state of `L` sites, amplitudes indexed with the first site
/// as the most significant digit.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    pub l: usize,
    pub d: usize,
    pub amps: Vec<C64>,
}
