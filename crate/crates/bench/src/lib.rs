//! Shared fixtures for the benchmarks.

use geoent_core::imps::random_imps;
use geoent_core::InfiniteMps;

/// Seeded random canonical qubit state used across benches.
pub fn fixture(chi: usize) -> InfiniteMps {
    random_imps(0xbe7c, 2, chi).expect("random states are always canonicalizable")
}
