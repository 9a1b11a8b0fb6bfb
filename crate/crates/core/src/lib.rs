//! Zeroth-order eigenstates of two interacting spin-1/2 fermions in a 1D
//! confining potential, and their particle entanglement.
//!
//! The interaction `λV(x₁ − x₂)` lifts the degeneracy of the non-interacting
//! levels. As `λ → 0` the exact eigenstates converge to the eigenvectors of
//! the interaction restricted to a degenerate level, and those limits are in
//! general entangled even though the interaction vanishes.
//!
//! - [`spbasis`]: single-particle modes (analytic oscillator, finite differences).
//! - [`entangle`]: antisymmetric two-fermion states, Schmidt spectra, `ε_L`, `ε_vN`.
//! - [`twobody`]: spatial two-body integrals and Slater-determinant matrix elements.
//! - [`degenpt`]: degenerate levels, the restricted interaction matrix, zeroth-order states.
//! - [`ci`]: full configuration interaction on a truncated basis, used as an oracle.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ci;
pub mod degenpt;
pub mod entangle;
mod error;
pub mod linalg;
pub mod spbasis;
pub mod twobody;

pub use error::{Error, Result};
