//! Coherent and entangled states on torus and Möbius topologies.
//!
//! Every closed-form overlap is paired with a brute-force evaluation on a
//! truncated lattice so the two can be checked against each other.

// Inputs are rejected with `!(x > 0.0)` style checks so that NaN fails too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherent;
pub mod diagnostics;
pub mod entangle;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod mechanics;
pub mod oscillator;
pub mod theta;
pub mod two_mode;

pub use error::{Error, Result};
pub use num_complex::Complex64;
