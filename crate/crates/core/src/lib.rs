//! Entanglement detection from subset purities measured by a lattice
//! beam-splitter network, with error correction and variance analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bham;
pub mod cli;
pub mod combinatorics;
pub mod errmodel;
pub mod error;
pub mod estimator;
pub mod figures;
pub mod io;
mod lp;
pub mod network;
pub mod purity;
pub mod qstate;
pub mod variance;

pub use error::{Error, Result};

/// Widest register accepted by the pure-state routes.
pub const MAX_QUBITS: usize = 15;
/// Widest register stored as a dense density matrix.
pub const MAX_DENSE_QUBITS: usize = 10;
/// Widest register for full sign-pattern distributions.
pub const MAX_SIGN_PATTERN_QUBITS: usize = 10;
/// Widest register for the spatial (position-resolved) channel.
pub const MAX_SPATIAL_SITES: usize = 6;
