//! Phaseless auxiliary-field quantum Monte Carlo (AFQMC) at desk scale.
//!
//! The crate projects ground states of lattice and ab-initio Hamiltonians by
//! a stochastic imaginary-time walk in the space of Slater determinants,
//! guided by a pluggable trial wavefunction:
//!
//! * [`hamiltonians`] builds Hubbard chains, ingests coupling tables and
//!   FCIDUMP integrals, and Cholesky-factorizes the two-body interaction so
//!   a continuous Hubbard-Stratonovich transformation applies uniformly.
//! * [`fockspace`] is the exact-diagonalization oracle: occupation bases,
//!   sparse sector Hamiltonians, ground states, fidelities, and truncation
//!   of statevectors into multi-determinant expansions.
//! * [`gaussian`] implements Slater-determinant algebra (overlaps, Green's
//!   functions, one-body propagation, QR stabilization) and mean-field trial
//!   preparation by imaginary-time evolution.
//! * [`trials`] evaluates overlaps, local energies and force biases for
//!   single-determinant, multi-determinant and statevector trials.
//! * [`vqe`] optimizes a Trotterized UCCSD ansatz over statevectors, with
//!   MP2 initialization, producing another trial flavor.
//! * [`propagation`] is the phaseless AFQMC driver: force-biased sampling,
//!   weight/phase updates, population control, blocking error analysis.
//! * [`analysis`] post-processes energies: complete-basis-set extrapolation,
//!   relative energies, zero-point vibrational corrections.
//!
//! Runnable examples live under `examples/`; a thin `afqmc` binary exposes
//! the same workflows as subcommands driven by a config file.

pub mod analysis;
pub mod cli;
pub mod constants;
mod error;
pub mod fockspace;
pub mod gaussian;
pub mod hamiltonians;
pub mod linalg;
pub mod propagation;
pub mod trials;
pub mod vqe;

pub use error::{AfqmcError, Result};
