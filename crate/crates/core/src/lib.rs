//! Kernel-weighted non-local cochain complexes on finite metric measure spaces.
//!
//! Points carry a metric and positive masses ([`space`]); a system of diagonal
//! neighbourhoods selects admissible tuples ([`neighborhoods`]); a jump kernel
//! turns tuples into masses ([`kernels`]). Antisymmetric cochains and integer
//! coboundaries live in [`cochains`], weighted spectra and decompositions in
//! [`hodge`], exact Betti numbers in [`cohomology`], cover-based checks in
//! [`covers`], and capacities in [`capacity`]. [`verify`] bundles the property
//! suites used by the command-line tool.

pub mod capacity;
pub mod cochains;
pub mod cohomology;
pub mod covers;
pub mod error;
pub mod hodge;
pub mod kernels;
pub mod linalg;
pub mod neighborhoods;
pub mod space;
pub mod verify;

pub use error::{Error, Result};
