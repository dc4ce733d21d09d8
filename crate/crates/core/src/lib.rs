//! Classical and semi-quantum restricted Boltzmann machines, evaluated exactly.
//!
//! The crate is `no_std` (with `alloc`) and has no IO. It provides:
//!
//! - [`model`]: model families, parameter layout, flattening and initialization.
//! - [`closedform`]: log-domain output probabilities and distribution metrics.
//! - [`grad`]: analytic negative log-likelihood gradients and a finite-difference checker.
//! - [`oracle`]: a dense Hamiltonian / Gibbs-state reference implementation.
//! - [`datasets`]: the parity, cardinality, simplified bars-and-stripes and random-support targets.
//! - [`optim`]: the AMSGrad optimizer.
//! - [`trainer`]: training loops, threshold analysis, gradient-variance and equivalence studies.
//!
//! Bitstrings are `u64` indices over `n` bits with `v_1` as the most significant bit.
#![no_std]

extern crate alloc;

pub mod closedform;
pub mod datasets;
mod error;
pub mod grad;
pub mod model;
pub mod optim;
pub mod oracle;
pub mod trainer;

pub use error::{Error, Result};

/// Value of `v_{i+1}` (0-based `i`) as a sign: `+1` for bit 0, `-1` for bit 1.
#[inline]
pub fn spin(v: u64, i: usize, n: usize) -> f64 {
    if (v >> (n - 1 - i)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Library version, embedded in every artifact the CLI writes.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
