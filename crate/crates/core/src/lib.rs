//! Zero modes of gain/loss-modulated tight-binding lattices.
//!
//! A reservoir chain with alternating gain and loss `±iγ` carries zero modes
//! whose amplitudes follow the Lucas sequences `U_m(P, Q)` and `V_m(P, Q)`:
//! linear localization on each sublattice (the `U` branch at `α = 1`) or a
//! constant-intensity mode with ±π/2 neighbor phase steps (the `V` branch).
//! This crate builds the lattices, diagonalizes their non-Hermitian
//! Hamiltonians, tracks spectra in the coupling `t′`, locates zero modes and
//! exceptional points, and computes the diagnostics that identify the modes.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod figures;
pub mod lattice;
pub mod linalg;
pub mod sequences;
pub mod spectral;

pub use error::{Error, Result};
