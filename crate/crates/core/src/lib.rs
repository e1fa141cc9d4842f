//! Qubit-efficient ground-state energies and harmonic vibrational frequencies
//! for closed-shell diatomic molecules.
//!
//! The pipeline runs from precomputed molecular-orbital integrals (FCIDUMP)
//! through pair-energy active-space selection, frozen-core folding,
//! fermion-to-qubit mapping with two-qubit tapering, exact diagonalization or
//! VQE on a statevector simulator, and finally a five-point quadratic fit of
//! the potential energy curve.
//!
//! Conventions used throughout:
//! - spin orbitals are block ordered: `p` is the alpha orbital of MO `p`,
//!   `p + m` its beta partner;
//! - qubit 0 is the least-significant bit of a statevector index;
//! - energies in Hartree, lengths in Angstrom, frequencies in cm^-1.

pub mod activespace;
pub mod ansatz;
pub mod chemdata;
pub mod constants;
mod error;
pub mod fermion;
pub mod linalg;
pub mod optimize;
pub mod pipeline;
pub mod qubitmap;
pub mod simulator;
pub mod solver;
pub mod spectro;

pub use error::{Error, Result};
