//! Entanglement measures for free-fermion lattice ground states.
//!
//! Three mutually cross-checking computational routes are provided:
//!
//! - **Overlap matrix** ([`overlap`]): the Gram matrix of occupied orbitals
//!   restricted to a spatial region. Its spectrum `{P_γ}` yields closed-form
//!   von Neumann / Rényi entropies and the logarithmic negativity under the
//!   untwisted fermionic partial transpose (uPT).
//! - **Exact Fock-space diagonalization** ([`fock`]): a dense many-body
//!   oracle (N ≲ 14 sites) that builds the ground state from Slater-minor
//!   amplitudes and performs signed partial traces and partial transposes
//!   directly on the 2^N density matrix.
//! - **Green's function / covariance** ([`greens`]): Gaussian-state formula
//!   for the uPT negativity of (generally mixed) reduced states, plus the
//!   bosonic-partial-transpose upper bound `E_bPT ≤ E_uPT + ln√2`.
//!
//! [`asymptotic`] adds Fisher-Hartwig predictions for the 1D chain (leading
//! log term and the digamma correction), and [`model`] builds the lattice
//! Hamiltonians everything runs on.

pub mod asymptotic;
pub mod error;
pub mod fock;
pub mod greens;
mod la;
pub mod model;
pub mod overlap;
pub mod spectral;
pub mod spectrum;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
