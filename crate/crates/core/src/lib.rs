//! Finite-dimensional laboratory for quantum Markov semigroups.
//!
//! Builds Lindblad generators in jump-operator form on matrix algebras,
//! diagnoses detailed balance (trace / GNS / KMS), computes spectral gaps
//! and weighted noncommutative L^p (Kosaki) norms, and produces numeric
//! certificates for Poincare, Klein, convex-chain, concentration, diameter
//! and composite-gap inequalities.
//!
//! The crate is `no_std` + `alloc`: all state lives in explicit values and
//! every operation is a pure function, so callers may share inputs across
//! threads freely. IO, configuration and report formats live in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]
// dense matrix code indexes by (row, col) throughout
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod extremize;
pub mod inequalities;
pub mod lpspaces;
pub mod matcore;
pub mod models;
pub mod qms;
pub mod sampling;

pub use error::{Error, Result};
pub use matcore::{
    CMat, HermitianMatrix, InnerProduct, PNorm, SpectralDecomposition, TraceMode, C64,
};
